#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "megp/dataset.hpp"
#include "megp/expression.hpp"
#include "megp/gp_config.hpp"

namespace megp {

struct FitResult {
    Expression expression;
    double train_mae = 0.0;
    double train_rmse = 0.0;
    std::size_t generations_run = 0;
    std::uint64_t seed = 0;
};

/// Called once per generation with the best raw MAE seen so far.
using GenerationCallback = std::function<void(std::size_t generation, double best_mae)>;

double mean_absolute_error(std::span<const double> actual, std::span<const double> predicted);
double root_mean_squared_error(std::span<const double> actual, std::span<const double> predicted);

/// One standard-GP run. Selection minimises MAE + parsimony * size; the
/// returned individual is the lowest raw MAE seen across all generations.
/// `threads` parallelises fitness evaluation and never changes the result.
FitResult fit(const Dataset& train, const GpConfig& config, unsigned threads = 1,
    const GenerationCallback& on_generation = {});

/// `runs` independent fits seeded with derive_seed(config.seed, r); returns
/// the best by config.run_selection_metric, ties to the lower run index.
FitResult best_of_runs(const Dataset& train, std::size_t runs, const GpConfig& config, unsigned threads = 1);

} // namespace megp
