#pragma once

#include <cstddef>
#include <cstdint>

namespace megp {

/// Criterion used to pick the winner among independent GP runs.
enum class RunSelectionMetric { Rmse, Mae };

struct GpConfig {
    std::size_t population_size = 200;
    std::size_t max_generations = 500;
    std::size_t init_depth_min = 2;
    std::size_t init_depth_max = 6;
    double p_crossover = 0.9;
    double p_mutation = 0.01;
    std::size_t tournament_size = 20;
    double parsimony_coefficient = 1e-3;
    double constant_min = -1000.0;
    double constant_max = 1000.0;
    std::uint64_t seed = 0;
    RunSelectionMetric run_selection_metric = RunSelectionMetric::Rmse;

    /// Throws InputError when any invariant is violated.
    void validate() const;
};

} // namespace megp
