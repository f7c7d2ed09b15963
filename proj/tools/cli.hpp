#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "megp/cluster.hpp"
#include "megp/data_io.hpp"
#include "megp/predictor.hpp"

namespace megp::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInputError = 2,
    kDegenerateData = 3,
};

enum class Profile { Paper, Fast };

/// Everything a command needs, assembled from defaults, the profile, the
/// JSON config file and command-line flags (in increasing precedence).
struct RunConfig {
    Profile profile = Profile::Paper;
    MegpConfig megp;
    CleaningRules cleaning;
    std::size_t folds = 10;
    std::vector<std::string> methods { "GP-std", "GP-sim-avg", "GP-w-avg(n)", "GP-best-cl", "GP-w-avg(d)",
        "GP-w-avg(nd)" };
    std::vector<DistanceMeasure> measures { DistanceMeasure::Euclidean, DistanceMeasure::Manhattan,
        DistanceMeasure::Chebyshev, DistanceMeasure::Cosine };
    DistanceNormalization distance_norm = DistanceNormalization::Max;
    bool signed_rank = false;
    std::optional<std::string> compare;
    std::string target = "y";
    std::vector<std::string> features;
    std::vector<std::string> aux_columns { "regime" };
    std::filesystem::path output_dir = ".";
    std::string mode = "megp";
    PredictionApproach approach = PredictionApproach::WeightedND;
    DistanceMeasure measure = DistanceMeasure::Euclidean;
};

/// Applies the population / generation / run-count preset of a profile.
void apply_profile(Profile profile, RunConfig& config);

/// Merges a JSON config document; unknown keys raise InputError.
void merge_config(const std::string& json_text, RunConfig& config);

/// The four expert-selected mill inputs used when `--features plant` is given.
const std::vector<std::string>& plant_features();

/// Runs the tool with the given arguments (argv[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace megp::cli
