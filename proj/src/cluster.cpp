#include "megp/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "megp/error.hpp"
#include "megp/random.hpp"

namespace megp {

void MegpConfig::validate() const
{
    gp.validate();
    if (runs_per_cluster < 1) {
        throw InputError("runs_per_cluster must be at least 1");
    }
    if (!(min_remaining_fraction > 0.0 && min_remaining_fraction < 1.0)) {
        throw InputError("min_remaining_fraction must lie in (0, 1)");
    }
    if (max_clusters < 1) {
        throw InputError("max_clusters must be at least 1");
    }
}

std::size_t MegpConfig::remaining_limit(std::size_t train_size) const
{
    return static_cast<std::size_t>(std::ceil(min_remaining_fraction * static_cast<double>(train_size)));
}

std::vector<double> MegpModel::standardize(std::span<const double> x_raw) const
{
    if (x_raw.size() != n_features()) {
        throw InputError("feature vector has " + std::to_string(x_raw.size()) + " entries, model expects "
            + std::to_string(n_features()));
    }
    std::vector<double> z(x_raw.size());
    for (std::size_t f = 0; f < z.size(); ++f) {
        z[f] = (x_raw[f] - feature_means[f]) / feature_stds[f];
    }
    return z;
}

double epsilon_threshold(std::span<const double> residuals)
{
    if (residuals.empty()) {
        throw InputError("epsilon threshold needs at least one residual");
    }
    std::vector<double> abs(residuals.size());
    std::transform(residuals.begin(), residuals.end(), abs.begin(), [](double r) { return std::abs(r); });
    const auto n = abs.size();
    const auto mid = abs.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(abs.begin(), mid, abs.end());
    if (n % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(abs.begin(), mid);
    return 0.5 * (lower + upper);
}

Standardization standardization(const Dataset& data, bool enabled)
{
    const auto d = data.n_features();
    Standardization s { std::vector<double>(d, 0.0), std::vector<double>(d, 1.0) };
    if (!enabled || data.rows() == 0) {
        return s;
    }
    const auto n = static_cast<double>(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto r = data.row(i);
        for (std::size_t f = 0; f < d; ++f) {
            s.means[f] += r[f];
        }
    }
    for (auto& m : s.means) {
        m /= n;
    }
    std::vector<double> ss(d, 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto r = data.row(i);
        for (std::size_t f = 0; f < d; ++f) {
            const double c = r[f] - s.means[f];
            ss[f] += c * c;
        }
    }
    for (std::size_t f = 0; f < d; ++f) {
        const double sd = std::sqrt(ss[f] / n);
        s.stds[f] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

namespace {

    ClusterModel make_cluster(const Dataset& train, const Standardization& stats, const Expression& equation,
        double epsilon, std::vector<std::size_t> members, std::size_t iteration)
    {
        ClusterModel c { .equation = equation, .epsilon = epsilon, .member_count = members.size() };
        const auto d = train.n_features();
        c.member_features.reserve(members.size() * d);
        for (auto i : members) {
            const auto r = train.row(i);
            for (std::size_t f = 0; f < d; ++f) {
                c.member_features.push_back((r[f] - stats.means[f]) / stats.stds[f]);
            }
        }
        c.member_indices = std::move(members);
        c.iteration_index = iteration;
        return c;
    }

} // namespace

MegpModel cluster(const Dataset& train, const MegpConfig& config, unsigned threads)
{
    config.validate();
    train.check();
    if (train.n_features() < 1) {
        throw InputError("clustering needs at least 1 feature");
    }
    const std::size_t limit = config.remaining_limit(train.rows());
    if (static_cast<double>(train.rows()) * config.min_remaining_fraction < 2.0 - 1e-9) {
        throw InputError("clustering needs at least " + std::to_string(static_cast<std::size_t>(std::ceil(2.0 / config.min_remaining_fraction)))
            + " training rows for min_remaining_fraction " + std::to_string(config.min_remaining_fraction));
    }

    const auto stats = standardization(train, config.standardize);
    MegpModel model {
        .feature_names = train.feature_names,
        .target_name = train.target_name,
        .feature_means = stats.means,
        .feature_stds = stats.stds,
        .config = config,
    };

    std::vector<std::size_t> remaining(train.rows());
    std::iota(remaining.begin(), remaining.end(), std::size_t { 0 });

    for (std::size_t iteration = 0;; ++iteration) {
        const Dataset current = train.subset(remaining);
        GpConfig gp = config.gp;
        gp.seed = derive_seed(config.gp.seed, iteration);
        const FitResult best = best_of_runs(current, config.runs_per_cluster, gp, threads);

        std::vector<double> predicted(current.rows());
        evaluate_batch(best.expression, current.columns(), predicted);
        std::vector<double> residuals(current.rows());
        for (std::size_t i = 0; i < residuals.size(); ++i) {
            residuals[i] = current.target[i] - predicted[i];
        }
        const double epsilon = epsilon_threshold(residuals);

        std::vector<std::size_t> captured;
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < residuals.size(); ++i) {
            (std::abs(residuals[i]) < epsilon ? captured : kept).push_back(remaining[i]);
        }

        if (captured.empty()) {
            if (model.clusters.empty()) {
                // Nothing strictly below a zero median: keep everything under one equation.
                model.clusters.push_back(
                    make_cluster(train, stats, best.expression, kUnboundedEpsilon, remaining, iteration));
                remaining.clear();
            }
            break;
        }

        model.clusters.push_back(make_cluster(train, stats, best.expression, epsilon, std::move(captured), iteration));
        remaining = std::move(kept);
        if (remaining.size() <= limit || model.clusters.size() >= config.max_clusters) {
            break;
        }
    }

    model.leftover_count = remaining.size();
    return model;
}

MegpModel single_equation_model(const Dataset& train, const Expression& equation, const MegpConfig& config)
{
    train.check();
    if (train.rows() == 0) {
        throw InputError("single-equation model needs a non-empty training set");
    }
    const auto stats = standardization(train, config.standardize);
    std::vector<std::size_t> all(train.rows());
    std::iota(all.begin(), all.end(), std::size_t { 0 });
    MegpModel model {
        .feature_names = train.feature_names,
        .target_name = train.target_name,
        .feature_means = stats.means,
        .feature_stds = stats.stds,
        .leftover_count = 0,
        .config = config,
    };
    model.clusters.push_back(make_cluster(train, stats, equation, kUnboundedEpsilon, std::move(all), 0));
    return model;
}

} // namespace megp
