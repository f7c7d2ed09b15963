#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "megp/dataset.hpp"
#include "megp/expression.hpp"
#include "megp/gp_config.hpp"
#include "megp/gp_engine.hpp"

namespace megp {

struct MegpConfig {
    GpConfig gp;
    std::size_t runs_per_cluster = 30;
    double min_remaining_fraction = 0.01;
    std::size_t max_clusters = 32;
    /// z-score features before distance queries (equations always see raw units).
    bool standardize = true;

    void validate() const;
    /// N: clustering stops once at most this many training points remain.
    std::size_t remaining_limit(std::size_t train_size) const;
};

/// Epsilon recorded for the single catch-all cluster of the degenerate path.
inline constexpr double kUnboundedEpsilon = std::numeric_limits<double>::infinity();

struct ClusterModel {
    Expression equation;
    double epsilon = 0.0;
    std::size_t member_count = 0;
    /// member_count x n_features, row-major, standardized.
    std::vector<double> member_features;
    /// Row indices of the members in the training set that built the model.
    std::vector<std::size_t> member_indices;
    std::size_t iteration_index = 0;

    std::span<const double> member(std::size_t i, std::size_t n_features) const
    {
        return { member_features.data() + i * n_features, n_features };
    }
};

struct MegpModel {
    std::vector<ClusterModel> clusters;
    std::vector<std::string> feature_names;
    std::string target_name;
    std::vector<double> feature_means;
    std::vector<double> feature_stds;
    std::size_t leftover_count = 0;
    MegpConfig config;

    std::size_t n_features() const noexcept { return feature_means.size(); }
    std::vector<double> standardize(std::span<const double> x_raw) const;
};

/// Median of |residuals|; mean of the two central values for even counts.
double epsilon_threshold(std::span<const double> residuals);

struct Standardization {
    std::vector<double> means;
    std::vector<double> stds;
};

/// Column means and population standard deviations; zero spread maps to 1.
/// With `enabled == false` returns the identity transform.
Standardization standardization(const Dataset& data, bool enabled = true);

/// Residual-driven clustering: repeatedly fits best_of_runs on the remaining
/// points and peels off those with |residual| < median |residual|.
MegpModel cluster(const Dataset& train, const MegpConfig& config, unsigned threads = 1);

/// Wraps a single equation as an m = 1 model covering all of `train`
/// (standard-GP mode). The cluster's epsilon is kUnboundedEpsilon.
MegpModel single_equation_model(const Dataset& train, const Expression& equation, const MegpConfig& config);

} // namespace megp
