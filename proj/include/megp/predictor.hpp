#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "megp/cluster.hpp"
#include "megp/dataset.hpp"

namespace megp {

enum class DistanceMeasure { Euclidean, Manhattan, Chebyshev, Cosine };

enum class PredictionApproach { BestCluster, SimpleAverage, WeightedN, WeightedD, WeightedND };

/// How raw per-cluster minimum distances are mapped into [0, 1].
enum class DistanceNormalization { Max, MinMax, Sum };

std::string_view to_string(DistanceMeasure measure) noexcept;
std::string_view short_name(DistanceMeasure measure) noexcept;
std::string_view to_string(PredictionApproach approach) noexcept;
std::string_view to_string(DistanceNormalization norm) noexcept;

/// Accepts full names or the short table forms ("euclidean", "Euc", ...), case-insensitive.
std::optional<DistanceMeasure> parse_distance_measure(std::string_view text);
/// Accepts "GP-best-cl", "GP-sim-avg", "GP-w-avg(n)", "GP-w-avg(d)", "GP-w-avg(nd)".
std::optional<PredictionApproach> parse_approach(std::string_view text);
std::optional<DistanceNormalization> parse_normalization(std::string_view text);

constexpr bool uses_distance(PredictionApproach a) noexcept
{
    return a == PredictionApproach::BestCluster || a == PredictionApproach::WeightedD
        || a == PredictionApproach::WeightedND;
}

/// Euclidean, Manhattan, Chebyshev or cosine distance (1 - cos angle; 1 when
/// either vector is zero).
double distance(std::span<const double> p, std::span<const double> q, DistanceMeasure measure);

double min_distance_to_cluster(std::span<const double> x, const ClusterModel& cluster, DistanceMeasure measure);

/// All zeros when raw has one entry or the scheme's divisor is zero.
std::vector<double> normalize_distances(std::span<const double> raw,
    DistanceNormalization norm = DistanceNormalization::Max);

/// Per-cluster ingredients of one prediction.
struct ClusterSignals {
    std::vector<double> predictions;     // p_ij
    std::vector<double> raw_distances;   // min distance to each cluster
    std::vector<double> norm_distances;  // d_ij in [0, 1]
    std::vector<double> sizes;           // n_j
};

/// Applies one combination rule. Weighted rules fall back to the simple
/// average when their weight sum is zero. BestCluster picks the smallest raw
/// distance, ties to the earliest cluster.
double combine(PredictionApproach approach, const ClusterSignals& signals);
std::size_t nearest_cluster(std::span<const double> raw_distances);

struct PredictionBreakdown {
    ClusterSignals signals;
    double prediction = 0.0;
    std::size_t best_cluster = 0;
    PredictionApproach approach = PredictionApproach::BestCluster;
    DistanceMeasure measure = DistanceMeasure::Euclidean;
};

ClusterSignals cluster_signals(const MegpModel& model, std::span<const double> x_raw, DistanceMeasure measure,
    DistanceNormalization norm = DistanceNormalization::Max);

PredictionBreakdown predict(const MegpModel& model, std::span<const double> x_raw, PredictionApproach approach,
    DistanceMeasure measure, DistanceNormalization norm = DistanceNormalization::Max);

/// Predictions for every row of `data` (columns matched by position).
std::vector<PredictionBreakdown> predict_batch(const MegpModel& model, const Dataset& data,
    PredictionApproach approach, DistanceMeasure measure, DistanceNormalization norm = DistanceNormalization::Max,
    unsigned threads = 1);

} // namespace megp
