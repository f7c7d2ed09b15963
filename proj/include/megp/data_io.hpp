#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "megp/dataset.hpp"

namespace megp {

struct CsvLoadOptions {
    std::string target;
    /// Explicit feature columns in order; empty means every column that is
    /// neither the target nor listed in `aux`.
    std::vector<std::string> features;
    /// Columns carried along but never used as features (absent ones are skipped).
    std::vector<std::string> aux;
    /// When false a missing target column yields zero targets and has_target = false.
    bool require_target = true;
};

struct CsvLoadResult {
    Dataset data;
    std::size_t dropped_rows = 0;
    bool has_target = true;
};

/// Reads an RFC-4180 style CSV with a header row. Rows with an empty or
/// non-numeric cell in any selected column are dropped and counted.
CsvLoadResult load_csv(const std::filesystem::path& path, const CsvLoadOptions& options);
CsvLoadResult parse_csv(const std::string& text, const CsvLoadOptions& options);

/// Writes features, target, then aux columns; values round-trip exactly.
void save_csv(const std::filesystem::path& path, const Dataset& data);
std::string to_csv(const Dataset& data);

struct OutlierFences {
    std::string column;
    double q1 = 0.0;
    double q3 = 0.0;
    double multiplier = 1.5;
    double lower = 0.0;
    double upper = 0.0;
};

struct CleaningRules {
    std::vector<std::string> nonnegative_columns;
    std::vector<std::string> percent_columns;
    std::optional<std::string> outlier_column;
    double iqr_multiplier = 1.5;
    /// Reuse fences from an earlier pass instead of recomputing quantiles.
    std::optional<OutlierFences> frozen_fences;
};

struct RemovalReport {
    std::size_t input_rows = 0;
    std::size_t output_rows = 0;
    std::size_t removed_nonnegative = 0;
    std::size_t removed_percent = 0;
    std::size_t removed_outlier = 0;
    std::size_t removed_total = 0;
    std::optional<OutlierFences> fences;

    std::string to_json() const;
};

struct CleanResult {
    Dataset data;
    RemovalReport report;
};

/// Linear-interpolation quantile (the common "type 7" definition).
double quantile(std::vector<double> values, double q);

/// Drops rows with negative values in nonnegative columns, values outside
/// [0, 100] in percent columns, or outside [Q1 - m IQR, Q3 + m IQR] on the
/// outlier column (quantiles from the input). A row failing several rules
/// counts under each of them but is removed once.
CleanResult clean(const Dataset& data, const CleaningRules& rules);

struct ColumnStats {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double sd = 0.0; // sample, n - 1
};

struct Description {
    std::vector<ColumnStats> columns; // features then target
    std::vector<std::vector<double>> correlation;

    std::string to_csv() const;
};

/// Per-column min, max, mean, sample SD and the Pearson correlation matrix
/// (every entry involving a constant column is 0, its diagonal included).
Description describe(const Dataset& data);

struct RegimeSpec {
    std::string formula;
    double span = 0.0;
    double noise_sd = 0.0;
    double feature_min = 0.0;
    double feature_max = 10.0;
    std::optional<double> label;
};

struct SynthSpec {
    std::size_t n_points = 0;
    std::size_t n_features = 0;
    std::vector<RegimeSpec> regimes;

    static SynthSpec from_json(const std::string& text);
    static SynthSpec load(const std::filesystem::path& path);
};

/// Time-ordered samples where consecutive spans follow different formulas.
/// Features are uniform on the regime's range, targets get Gaussian noise;
/// the regime label (index unless given) lands in aux column "regime".
Dataset synth_regimes(const SynthSpec& spec, std::uint64_t seed);

} // namespace megp
