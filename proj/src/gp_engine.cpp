#include "megp/gp_engine.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "megp/error.hpp"
#include "megp/parallel.hpp"
#include "megp/random.hpp"

namespace megp {

void GpConfig::validate() const
{
    if (population_size < 2) {
        throw InputError("population_size must be at least 2");
    }
    if (max_generations < 1) {
        throw InputError("max_generations must be at least 1");
    }
    if (init_depth_min < 1 || init_depth_min > init_depth_max) {
        throw InputError("init depth range must satisfy 1 <= min <= max");
    }
    if (p_crossover < 0 || p_mutation < 0 || p_crossover + p_mutation > 1.0) {
        throw InputError("p_crossover and p_mutation must be non-negative with sum <= 1");
    }
    if (tournament_size < 1) {
        throw InputError("tournament_size must be at least 1");
    }
    if (!(parsimony_coefficient >= 0)) {
        throw InputError("parsimony_coefficient must be >= 0");
    }
    if (!std::isfinite(constant_min) || !std::isfinite(constant_max) || constant_min > constant_max) {
        throw InputError("constant range must be a finite interval");
    }
}

double mean_absolute_error(std::span<const double> actual, std::span<const double> predicted)
{
    if (actual.empty() || actual.size() != predicted.size()) {
        throw InputError("MAE needs two non-empty vectors of equal length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sum += std::abs(actual[i] - predicted[i]);
    }
    return sum / static_cast<double>(actual.size());
}

double root_mean_squared_error(std::span<const double> actual, std::span<const double> predicted)
{
    if (actual.empty() || actual.size() != predicted.size()) {
        throw InputError("RMSE needs two non-empty vectors of equal length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(actual.size()));
}

namespace {

    struct Scored {
        double raw = 0.0;
        double penalized = 0.0;
    };

    std::size_t tournament(std::span<const Scored> scores, std::size_t size, Rng& rng)
    {
        std::uniform_int_distribution<std::size_t> pick(0, scores.size() - 1);
        std::size_t winner = pick(rng);
        for (std::size_t k = 1; k < size; ++k) {
            const auto challenger = pick(rng);
            if (scores[challenger].penalized < scores[winner].penalized) {
                winner = challenger;
            }
        }
        return winner;
    }

} // namespace

FitResult fit(const Dataset& train, const GpConfig& config, unsigned threads, const GenerationCallback& on_generation)
{
    config.validate();
    train.check();
    if (train.rows() < 2) {
        throw InputError("GP fitting needs at least 2 samples");
    }
    if (train.n_features() < 1) {
        throw InputError("GP fitting needs at least 1 feature");
    }

    const auto columns = train.columns();
    const auto n_features = train.n_features();
    Rng rng(config.seed);

    std::vector<Expression> population;
    population.reserve(config.population_size);
    for (std::size_t i = 0; i < config.population_size; ++i) {
        population.push_back(random_expression(config, n_features, rng));
    }

    std::vector<Scored> scores(config.population_size);
    std::optional<Expression> best;
    double best_mae = std::numeric_limits<double>::infinity();

    for (std::size_t gen = 0; gen < config.max_generations; ++gen) {
        parallel_for(population.size(), threads, [&](std::size_t i) {
            thread_local std::vector<double> predicted;
            predicted.resize(columns.rows);
            evaluate_batch(population[i], columns, predicted);
            const double raw = mean_absolute_error(train.target, predicted);
            scores[i] = { raw, raw + config.parsimony_coefficient * static_cast<double>(population[i].size()) };
        });

        for (std::size_t i = 0; i < population.size(); ++i) {
            if (!best || scores[i].raw < best_mae) {
                best = population[i];
                best_mae = scores[i].raw;
            }
        }
        if (on_generation) {
            on_generation(gen, best_mae);
        }
        if (gen + 1 == config.max_generations) {
            break;
        }

        std::vector<Expression> next;
        next.reserve(population.size());
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t k = 0; k < population.size(); ++k) {
            const auto parent = tournament(scores, config.tournament_size, rng);
            const double r = unit(rng);
            if (r < config.p_crossover) {
                const auto donor = tournament(scores, config.tournament_size, rng);
                next.push_back(crossover(population[parent], population[donor], rng));
            } else if (r < config.p_crossover + config.p_mutation) {
                next.push_back(mutate(population[parent], config, n_features, rng));
            } else {
                next.push_back(population[parent]);
            }
        }
        population = std::move(next);
    }

    std::vector<double> predicted(columns.rows);
    evaluate_batch(*best, columns, predicted);
    return FitResult {
        .expression = *best,
        .train_mae = mean_absolute_error(train.target, predicted),
        .train_rmse = root_mean_squared_error(train.target, predicted),
        .generations_run = config.max_generations,
        .seed = config.seed,
    };
}

FitResult best_of_runs(const Dataset& train, std::size_t runs, const GpConfig& config, unsigned threads)
{
    if (runs < 1) {
        throw InputError("runs must be at least 1");
    }
    std::vector<std::optional<FitResult>> results(runs);
    const unsigned inner = runs == 1 ? threads : 1U;
    parallel_for(runs, runs == 1 ? 1U : threads, [&](std::size_t r) {
        GpConfig run_config = config;
        run_config.seed = derive_seed(config.seed, r);
        results[r] = fit(train, run_config, inner);
    });

    auto metric = [&](const FitResult& f) {
        return config.run_selection_metric == RunSelectionMetric::Rmse ? f.train_rmse : f.train_mae;
    };
    std::size_t winner = 0;
    for (std::size_t r = 1; r < runs; ++r) {
        if (metric(*results[r]) < metric(*results[winner])) {
            winner = r;
        }
    }
    return std::move(*results[winner]);
}

} // namespace megp
