#include "megp/predictor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "megp/error.hpp"
#include "megp/parallel.hpp"

namespace megp {

namespace {

    std::string lower(std::string_view s)
    {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    }

    double squared_euclidean(std::span<const double> p, std::span<const double> q) noexcept
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double d = p[i] - q[i];
            sum += d * d;
        }
        return sum;
    }

} // namespace

std::string_view to_string(DistanceMeasure measure) noexcept
{
    switch (measure) {
    case DistanceMeasure::Euclidean:
        return "euclidean";
    case DistanceMeasure::Manhattan:
        return "manhattan";
    case DistanceMeasure::Chebyshev:
        return "chebyshev";
    case DistanceMeasure::Cosine:
        return "cosine";
    }
    return "?";
}

std::string_view short_name(DistanceMeasure measure) noexcept
{
    switch (measure) {
    case DistanceMeasure::Euclidean:
        return "Euc";
    case DistanceMeasure::Manhattan:
        return "Manh";
    case DistanceMeasure::Chebyshev:
        return "Cheb";
    case DistanceMeasure::Cosine:
        return "Cos";
    }
    return "?";
}

std::string_view to_string(PredictionApproach approach) noexcept
{
    switch (approach) {
    case PredictionApproach::BestCluster:
        return "GP-best-cl";
    case PredictionApproach::SimpleAverage:
        return "GP-sim-avg";
    case PredictionApproach::WeightedN:
        return "GP-w-avg(n)";
    case PredictionApproach::WeightedD:
        return "GP-w-avg(d)";
    case PredictionApproach::WeightedND:
        return "GP-w-avg(nd)";
    }
    return "?";
}

std::string_view to_string(DistanceNormalization norm) noexcept
{
    switch (norm) {
    case DistanceNormalization::Max:
        return "max";
    case DistanceNormalization::MinMax:
        return "minmax";
    case DistanceNormalization::Sum:
        return "sum";
    }
    return "?";
}

std::optional<DistanceMeasure> parse_distance_measure(std::string_view text)
{
    const auto s = lower(text);
    for (auto m : { DistanceMeasure::Euclidean, DistanceMeasure::Manhattan, DistanceMeasure::Chebyshev,
             DistanceMeasure::Cosine }) {
        if (s == to_string(m) || s == lower(short_name(m))) {
            return m;
        }
    }
    return std::nullopt;
}

std::optional<PredictionApproach> parse_approach(std::string_view text)
{
    const auto s = lower(text);
    for (auto a : { PredictionApproach::BestCluster, PredictionApproach::SimpleAverage, PredictionApproach::WeightedN,
             PredictionApproach::WeightedD, PredictionApproach::WeightedND }) {
        if (s == lower(to_string(a))) {
            return a;
        }
    }
    return std::nullopt;
}

std::optional<DistanceNormalization> parse_normalization(std::string_view text)
{
    const auto s = lower(text);
    for (auto n : { DistanceNormalization::Max, DistanceNormalization::MinMax, DistanceNormalization::Sum }) {
        if (s == to_string(n)) {
            return n;
        }
    }
    return std::nullopt;
}

double distance(std::span<const double> p, std::span<const double> q, DistanceMeasure measure)
{
    if (p.size() != q.size() || p.empty()) {
        throw InputError("distance needs two non-empty vectors of equal length");
    }
    switch (measure) {
    case DistanceMeasure::Euclidean:
        return std::sqrt(squared_euclidean(p, q));
    case DistanceMeasure::Manhattan: {
        double sum = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            sum += std::abs(p[i] - q[i]);
        }
        return sum;
    }
    case DistanceMeasure::Chebyshev: {
        double max = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            max = std::max(max, std::abs(p[i] - q[i]));
        }
        return max;
    }
    case DistanceMeasure::Cosine: {
        double dot = 0.0;
        double pp = 0.0;
        double qq = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            dot += p[i] * q[i];
            pp += p[i] * p[i];
            qq += q[i] * q[i];
        }
        if (pp == 0.0 || qq == 0.0) {
            return 1.0;
        }
        // rounding can push the cosine a hair outside [-1, 1]
        return std::clamp(1.0 - dot / (std::sqrt(pp) * std::sqrt(qq)), 0.0, 2.0);
    }
    }
    return 0.0;
}

double min_distance_to_cluster(std::span<const double> x, const ClusterModel& cluster, DistanceMeasure measure)
{
    if (cluster.member_count == 0) {
        throw InputError("cluster has no members");
    }
    const auto d = cluster.member_features.size() / cluster.member_count;
    if (x.size() != d) {
        throw InputError("query has " + std::to_string(x.size()) + " features, cluster has " + std::to_string(d));
    }
    double best = std::numeric_limits<double>::infinity();
    if (measure == DistanceMeasure::Euclidean) {
        for (std::size_t i = 0; i < cluster.member_count; ++i) {
            best = std::min(best, squared_euclidean(x, cluster.member(i, d)));
        }
        return std::sqrt(best);
    }
    for (std::size_t i = 0; i < cluster.member_count; ++i) {
        best = std::min(best, distance(x, cluster.member(i, d), measure));
    }
    return best;
}

std::vector<double> normalize_distances(std::span<const double> raw, DistanceNormalization norm)
{
    std::vector<double> out(raw.size(), 0.0);
    if (raw.size() <= 1) {
        return out;
    }
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    switch (norm) {
    case DistanceNormalization::Max:
        if (*hi > 0.0) {
            std::transform(raw.begin(), raw.end(), out.begin(), [&](double r) { return r / *hi; });
        }
        break;
    case DistanceNormalization::MinMax:
        if (*hi > *lo) {
            std::transform(raw.begin(), raw.end(), out.begin(), [&](double r) { return (r - *lo) / (*hi - *lo); });
        }
        break;
    case DistanceNormalization::Sum: {
        const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
        if (sum > 0.0) {
            std::transform(raw.begin(), raw.end(), out.begin(), [&](double r) { return r / sum; });
        }
        break;
    }
    }
    return out;
}

std::size_t nearest_cluster(std::span<const double> raw_distances)
{
    if (raw_distances.empty()) {
        throw InputError("no clusters to choose from");
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < raw_distances.size(); ++j) {
        if (raw_distances[j] < raw_distances[best]) {
            best = j;
        }
    }
    return best;
}

double combine(PredictionApproach approach, const ClusterSignals& s)
{
    const auto m = s.predictions.size();
    if (m == 0) {
        throw InputError("no cluster predictions to combine");
    }
    const bool need_n = approach == PredictionApproach::WeightedN || approach == PredictionApproach::WeightedND;
    const bool need_d = approach == PredictionApproach::WeightedD || approach == PredictionApproach::WeightedND;
    if ((need_n && s.sizes.size() != m) || (need_d && s.norm_distances.size() != m)
        || (approach == PredictionApproach::BestCluster && s.raw_distances.size() != m)) {
        throw InputError("cluster signal vectors have inconsistent lengths");
    }
    if (m == 1) {
        return s.predictions.front();
    }

    // rounding can push a convex combination a hair outside the hull
    const auto [lo, hi] = std::minmax_element(s.predictions.begin(), s.predictions.end());
    auto hull = [&](double v) { return std::clamp(v, *lo, *hi); };
    auto simple = [&] {
        return hull(std::accumulate(s.predictions.begin(), s.predictions.end(), 0.0) / static_cast<double>(m));
    };

    switch (approach) {
    case PredictionApproach::BestCluster:
        return s.predictions[nearest_cluster(s.raw_distances)];
    case PredictionApproach::SimpleAverage:
        return simple();
    default:
        break;
    }

    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double w = 1.0;
        if (need_n) {
            w *= s.sizes[j];
        }
        if (need_d) {
            w *= 1.0 - s.norm_distances[j];
        }
        num += w * s.predictions[j];
        den += w;
    }
    return den == 0.0 ? simple() : hull(num / den);
}

ClusterSignals cluster_signals(const MegpModel& model, std::span<const double> x_raw, DistanceMeasure measure,
    DistanceNormalization norm)
{
    if (model.clusters.empty()) {
        throw InputError("model has no clusters");
    }
    const auto z = model.standardize(x_raw);
    ClusterSignals s;
    const auto m = model.clusters.size();
    s.predictions.resize(m);
    s.raw_distances.resize(m);
    s.sizes.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& c = model.clusters[j];
        s.predictions[j] = evaluate(c.equation, x_raw);
        s.raw_distances[j] = min_distance_to_cluster(z, c, measure);
        s.sizes[j] = static_cast<double>(c.member_count);
    }
    s.norm_distances = normalize_distances(s.raw_distances, norm);
    return s;
}

PredictionBreakdown predict(const MegpModel& model, std::span<const double> x_raw, PredictionApproach approach,
    DistanceMeasure measure, DistanceNormalization norm)
{
    PredictionBreakdown out;
    out.signals = cluster_signals(model, x_raw, measure, norm);
    out.prediction = combine(approach, out.signals);
    out.best_cluster = nearest_cluster(out.signals.raw_distances);
    out.approach = approach;
    out.measure = measure;
    return out;
}

std::vector<PredictionBreakdown> predict_batch(const MegpModel& model, const Dataset& data,
    PredictionApproach approach, DistanceMeasure measure, DistanceNormalization norm, unsigned threads)
{
    if (data.n_features() != model.n_features()) {
        throw InputError("dataset has " + std::to_string(data.n_features()) + " features, model expects "
            + std::to_string(model.n_features()));
    }
    std::vector<PredictionBreakdown> out(data.rows());
    parallel_for(data.rows(), threads,
        [&](std::size_t i) { out[i] = predict(model, data.row(i), approach, measure, norm); });
    return out;
}

} // namespace megp
