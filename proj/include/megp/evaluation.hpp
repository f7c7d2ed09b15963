#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "megp/cluster.hpp"
#include "megp/dataset.hpp"
#include "megp/predictor.hpp"

namespace megp {

/// One rolling-origin split: train on [0, train_end), test on [train_end, test_end).
struct RollingSplit {
    std::size_t split_index = 0; // 1-based
    std::size_t train_begin = 0;
    std::size_t train_end = 0;
    std::size_t test_begin = 0;
    std::size_t test_end = 0;

    friend bool operator==(const RollingSplit&, const RollingSplit&) = default;
};

/// k + 1 contiguous blocks (remainder one-each to the earliest blocks);
/// split i trains on blocks 1..i and tests on block i + 1.
std::vector<RollingSplit> rolling_splits(std::size_t n, std::size_t k);

double mae(std::span<const double> actual, std::span<const double> predicted);

/// ((mae_std - mae_best) / mae_std) * 100. Throws InputError when mae_std == 0.
double improvement_percent(double mae_std, double mae_best);

struct RankTest {
    double statistic = 0.0;
    double p_value = 1.0;
    bool exact = false;
};

/// Largest pooled sample size handled by exact enumeration.
inline constexpr std::size_t kExactRankSumLimit = 20;

/// Two-sided Mann-Whitney rank-sum test. U is reported for sample `a`.
/// Exact null distribution for |a| + |b| <= kExactRankSumLimit, otherwise the
/// tie-corrected normal approximation with continuity correction.
RankTest wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);
/// Forces the normal approximation regardless of sample size.
RankTest wilcoxon_rank_sum_normal(std::span<const double> a, std::span<const double> b);

/// Two-sided paired signed-rank test on a - b (zero differences dropped).
RankTest wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// A report row: standard GP, or an MEGP combination rule with an optional
/// distance measure (distance-free rules carry none).
struct MethodSpec {
    std::optional<PredictionApproach> approach; // empty: GP-std
    std::optional<DistanceMeasure> measure;

    bool is_standard() const noexcept { return !approach.has_value(); }
    std::string label() const;         // "GP-std", "MEGP (GP-w-avg(nd))"
    std::string measure_label() const; // "-", "Euc", ...
    std::string key() const;           // "GP-std", "GP-w-avg(nd)/euclidean"

    friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// "GP-std", "GP-sim-avg", "GP-w-avg(nd)/Euclidean", ...; nullopt if unknown.
std::optional<MethodSpec> parse_method(std::string_view text);

/// Expands method names against the measure list: distance rules get one row
/// per measure unless a measure is pinned with "/". Duplicates are dropped.
std::vector<MethodSpec> expand_methods(std::span<const std::string> methods,
    std::span<const DistanceMeasure> measures);

struct ExperimentOptions {
    MegpConfig megp;
    std::size_t folds = 10;
    std::vector<MethodSpec> rows;
    DistanceNormalization norm = DistanceNormalization::Max;
    bool signed_rank = false;
};

struct MethodRow {
    MethodSpec method;
    std::vector<double> split_mae;
    std::vector<std::vector<double>> abs_errors;
    double mean = 0.0;
    double sd = 0.0;
    std::vector<std::optional<double>> improvement;
    std::optional<double> mean_improvement;
    std::optional<double> sd_improvement;
    std::vector<double> p_values;
    std::vector<double> statistics;
};

struct SplitSummary {
    RollingSplit split;
    std::size_t clusters = 0;
    std::size_t leftover = 0;
    std::vector<double> epsilons;
    std::vector<std::size_t> cluster_sizes;
    std::string gp_std_expression;
};

struct SplitReport {
    std::size_t folds = 0;
    std::vector<SplitSummary> splits;
    std::vector<MethodRow> rows; // rows[0] is always GP-std
    bool signed_rank = false;

    const MethodRow* find(const MethodSpec& method) const;
    /// Non-standard row with the lowest mean MAE (first on ties).
    const MethodRow* best_variant() const;
};

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> values);

/// Rolling-origin comparison of GP-std against the requested MEGP rows.
SplitReport run_experiment(const Dataset& data, const ExperimentOptions& options, unsigned threads = 1);

/// Rows = method x measure, columns S1..Sk, Mean, SD (2 decimals).
std::string table3_csv(const SplitReport& report);
/// GP-std row, `variant` row, "% improvement" row, "P-value" row.
std::string table4_csv(const SplitReport& report, const MethodRow& variant);
/// Full-precision JSON document of the whole report.
std::string report_json(const SplitReport& report);

} // namespace megp
