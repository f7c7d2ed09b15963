#include "megp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "megp/error.hpp"
#include "megp/gp_engine.hpp"
#include "megp/random.hpp"

namespace megp {

std::vector<RollingSplit> rolling_splits(std::size_t n, std::size_t k)
{
    if (k < 1) {
        throw InputError("rolling cross-validation needs k >= 1");
    }
    if (n < 2 * (k + 1)) {
        throw InputError("rolling cross-validation with k = " + std::to_string(k) + " needs at least "
            + std::to_string(2 * (k + 1)) + " rows, got " + std::to_string(n));
    }
    const std::size_t blocks = k + 1;
    const std::size_t base = n / blocks;
    const std::size_t extra = n % blocks;
    std::vector<std::size_t> bounds { 0 };
    for (std::size_t b = 0; b < blocks; ++b) {
        bounds.push_back(bounds.back() + base + (b < extra ? 1 : 0));
    }
    std::vector<RollingSplit> splits;
    for (std::size_t i = 1; i <= k; ++i) {
        splits.push_back({ .split_index = i,
            .train_begin = 0,
            .train_end = bounds[i],
            .test_begin = bounds[i],
            .test_end = bounds[i + 1] });
    }
    return splits;
}

double mae(std::span<const double> actual, std::span<const double> predicted)
{
    return mean_absolute_error(actual, predicted);
}

double improvement_percent(double mae_std, double mae_best)
{
    if (mae_std == 0.0) {
        throw InputError("improvement percentage is undefined for a zero baseline error");
    }
    return (mae_std - mae_best) / mae_std * 100.0;
}

namespace {

    constexpr double kMinP = std::numeric_limits<double>::denorm_min();

    // Midranks doubled so they stay integral: 2 * rank = first + last position (1-based).
    std::vector<std::int64_t> doubled_midranks(std::span<const double> values, std::vector<std::size_t>* tie_sizes)
    {
        const auto n = values.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return values[l] < values[r]; });
        std::vector<std::int64_t> ranks(n);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
                ++j;
            }
            const auto twice = static_cast<std::int64_t>(i + 1 + j + 1);
            for (std::size_t t = i; t <= j; ++t) {
                ranks[order[t]] = twice;
            }
            if (tie_sizes) {
                tie_sizes->push_back(j - i + 1);
            }
            i = j + 1;
        }
        return ranks;
    }

    double tie_term(const std::vector<std::size_t>& ties)
    {
        double sum = 0.0;
        for (auto t : ties) {
            const auto d = static_cast<double>(t);
            sum += d * d * d - d;
        }
        return sum;
    }

    double two_sided_normal(double deviation, double variance)
    {
        if (!(variance > 0.0)) {
            return 1.0;
        }
        const double z = (std::abs(deviation) - 0.5) / std::sqrt(variance);
        if (z <= 0.0) {
            return 1.0;
        }
        return std::clamp(std::erfc(z / std::sqrt(2.0)), kMinP, 1.0);
    }

    void check_samples(std::span<const double> a, std::span<const double> b)
    {
        if (a.empty() || b.empty()) {
            throw InputError("rank-sum test needs two non-empty samples");
        }
        auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(b.begin(), b.end(), finite)) {
            throw InputError("rank-sum test needs finite samples");
        }
    }

    struct Pooled {
        std::vector<std::int64_t> ranks;
        std::vector<std::size_t> ties;
        std::int64_t doubled_sum_a = 0;
    };

    Pooled pool(std::span<const double> a, std::span<const double> b)
    {
        std::vector<double> values(a.begin(), a.end());
        values.insert(values.end(), b.begin(), b.end());
        Pooled p;
        p.ranks = doubled_midranks(values, &p.ties);
        for (std::size_t i = 0; i < a.size(); ++i) {
            p.doubled_sum_a += p.ranks[i];
        }
        return p;
    }

    double u_statistic(const Pooled& p, std::size_t n1)
    {
        const auto n = static_cast<double>(n1);
        return static_cast<double>(p.doubled_sum_a) / 2.0 - n * (n + 1.0) / 2.0;
    }

    RankTest rank_sum_normal(std::span<const double> a, std::span<const double> b, const Pooled& p)
    {
        const auto n1 = static_cast<double>(a.size());
        const auto n2 = static_cast<double>(b.size());
        const double total = n1 + n2;
        const double u = u_statistic(p, a.size());
        const double variance = n1 * n2 / 12.0 * ((total + 1.0) - tie_term(p.ties) / (total * (total - 1.0)));
        return { u, two_sided_normal(u - n1 * n2 / 2.0, variance), false };
    }

} // namespace

RankTest wilcoxon_rank_sum_normal(std::span<const double> a, std::span<const double> b)
{
    check_samples(a, b);
    return rank_sum_normal(a, b, pool(a, b));
}

RankTest wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b)
{
    check_samples(a, b);
    const auto pooled = pool(a, b);
    const auto total = a.size() + b.size();
    if (pooled.ties.size() == 1) {
        return { u_statistic(pooled, a.size()), 1.0, true };
    }
    if (total > kExactRankSumLimit) {
        return rank_sum_normal(a, b, pooled);
    }

    // counts[k][s]: subsets of size k whose doubled rank sum is s.
    const auto n1 = a.size();
    const auto max_sum = static_cast<std::size_t>(std::accumulate(pooled.ranks.begin(), pooled.ranks.end(), std::int64_t { 0 }));
    std::vector<std::vector<std::uint64_t>> counts(n1 + 1, std::vector<std::uint64_t>(max_sum + 1, 0));
    counts[0][0] = 1;
    for (auto r : pooled.ranks) {
        const auto rank = static_cast<std::size_t>(r);
        for (std::size_t k = std::min(n1, total); k >= 1; --k) {
            for (std::size_t s = max_sum; s >= rank; --s) {
                counts[k][s] += counts[k - 1][s - rank];
            }
        }
    }
    const auto expected = static_cast<std::int64_t>(n1 * (total + 1));
    const auto observed = std::llabs(pooled.doubled_sum_a - expected);
    std::uint64_t extreme = 0;
    std::uint64_t all = 0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
        all += counts[n1][s];
        if (std::llabs(static_cast<std::int64_t>(s) - expected) >= observed) {
            extreme += counts[n1][s];
        }
    }
    const double p = static_cast<double>(extreme) / static_cast<double>(all);
    return { u_statistic(pooled, n1), std::clamp(p, kMinP, 1.0), true };
}

RankTest wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.empty()) {
        throw InputError("signed-rank test needs two non-empty samples of equal length");
    }
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (!std::isfinite(d)) {
            throw InputError("signed-rank test needs finite samples");
        }
        if (d != 0.0) {
            diffs.push_back(d);
        }
    }
    if (diffs.empty()) {
        return { 0.0, 1.0, true };
    }
    std::vector<double> magnitudes(diffs.size());
    std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
    std::vector<std::size_t> ties;
    const auto ranks = doubled_midranks(magnitudes, &ties);
    std::int64_t positive = 0;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        total += ranks[i];
        if (diffs[i] > 0) {
            positive += ranks[i];
        }
    }
    const double w_plus = static_cast<double>(positive) / 2.0;
    const auto n = static_cast<double>(diffs.size());

    if (diffs.size() <= kExactRankSumLimit) {
        std::vector<std::uint64_t> counts(static_cast<std::size_t>(total) + 1, 0);
        counts[0] = 1;
        for (auto r : ranks) {
            for (auto s = static_cast<std::size_t>(total); s >= static_cast<std::size_t>(r); --s) {
                counts[s] += counts[s - static_cast<std::size_t>(r)];
            }
        }
        // total = n(n + 1) is even, so the doubled mean total / 2 is integral.
        const std::int64_t expected = total / 2;
        const auto observed = std::llabs(positive - expected);
        std::uint64_t extreme = 0;
        std::uint64_t all = 0;
        for (std::size_t s = 0; s < counts.size(); ++s) {
            all += counts[s];
            if (std::llabs(static_cast<std::int64_t>(s) - expected) >= observed) {
                extreme += counts[s];
            }
        }
        return { w_plus, std::clamp(static_cast<double>(extreme) / static_cast<double>(all), kMinP, 1.0), true };
    }

    const double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(ties) / 48.0;
    return { w_plus, two_sided_normal(w_plus - n * (n + 1.0) / 4.0, variance), false };
}

std::string MethodSpec::label() const
{
    if (is_standard()) {
        return "GP-std";
    }
    return "MEGP (" + std::string(to_string(*approach)) + ")";
}

std::string MethodSpec::measure_label() const
{
    return measure ? std::string(short_name(*measure)) : std::string("-");
}

std::string MethodSpec::key() const
{
    if (is_standard()) {
        return "GP-std";
    }
    std::string k(to_string(*approach));
    if (measure) {
        k += "/";
        k += to_string(*measure);
    }
    return k;
}

std::optional<MethodSpec> parse_method(std::string_view text)
{
    std::string_view name = text;
    std::optional<DistanceMeasure> measure;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        name = text.substr(0, slash);
        measure = parse_distance_measure(text.substr(slash + 1));
        if (!measure) {
            return std::nullopt;
        }
    }
    std::string lowered(name);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lowered == "gp-std") {
        if (measure) {
            return std::nullopt;
        }
        return MethodSpec {};
    }
    auto approach = parse_approach(name);
    if (!approach) {
        return std::nullopt;
    }
    if (!uses_distance(*approach)) {
        measure.reset();
    }
    return MethodSpec { approach, measure };
}

std::vector<MethodSpec> expand_methods(std::span<const std::string> methods, std::span<const DistanceMeasure> measures)
{
    std::vector<MethodSpec> out;
    auto add = [&](const MethodSpec& m) {
        if (std::find(out.begin(), out.end(), m) == out.end()) {
            out.push_back(m);
        }
    };
    for (const auto& text : methods) {
        auto spec = parse_method(text);
        if (!spec) {
            throw InputError("unknown method '" + text + "'");
        }
        if (spec->is_standard() || !uses_distance(*spec->approach) || spec->measure) {
            add(*spec);
            continue;
        }
        if (measures.empty()) {
            throw InputError("method '" + text + "' needs at least one distance measure");
        }
        for (auto m : measures) {
            add(MethodSpec { spec->approach, m });
        }
    }
    return out;
}

double sample_sd(std::span<const double> values)
{
    if (values.size() < 2) {
        return 0.0;
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

const MethodRow* SplitReport::find(const MethodSpec& method) const
{
    for (const auto& row : rows) {
        if (row.method == method) {
            return &row;
        }
    }
    return nullptr;
}

const MethodRow* SplitReport::best_variant() const
{
    const MethodRow* best = nullptr;
    for (const auto& row : rows) {
        if (!row.method.is_standard() && (!best || row.mean < best->mean)) {
            best = &row;
        }
    }
    return best;
}

namespace {

    std::optional<double> safe_improvement(double base, double other)
    {
        if (base == 0.0) {
            return std::nullopt;
        }
        return improvement_percent(base, other);
    }

    std::vector<double> absolute_errors(std::span<const double> actual, std::span<const double> predicted)
    {
        std::vector<double> out(actual.size());
        for (std::size_t i = 0; i < actual.size(); ++i) {
            out[i] = std::abs(actual[i] - predicted[i]);
        }
        return out;
    }

    // Per-test-point predictions for every MEGP row of one split.
    std::vector<std::vector<double>> megp_predictions(const MegpModel& model, const Dataset& test,
        std::span<const MethodSpec> rows, DistanceNormalization norm)
    {
        const auto m = model.clusters.size();
        const auto columns = test.columns();
        std::vector<std::vector<double>> per_cluster(m, std::vector<double>(test.rows()));
        for (std::size_t j = 0; j < m; ++j) {
            evaluate_batch(model.clusters[j].equation, columns, per_cluster[j]);
        }
        std::vector<std::vector<double>> standardized(test.rows());
        for (std::size_t i = 0; i < test.rows(); ++i) {
            standardized[i] = model.standardize(test.row(i));
        }

        std::vector<std::vector<double>> out(rows.size(), std::vector<double>(test.rows()));
        for (std::size_t i = 0; i < test.rows(); ++i) {
            ClusterSignals signals;
            signals.predictions.resize(m);
            signals.sizes.resize(m);
            for (std::size_t j = 0; j < m; ++j) {
                signals.predictions[j] = per_cluster[j][i];
                signals.sizes[j] = static_cast<double>(model.clusters[j].member_count);
            }
            std::optional<DistanceMeasure> cached;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const auto& spec = rows[r];
                if (spec.is_standard()) {
                    continue;
                }
                if (spec.measure && spec.measure != cached) {
                    signals.raw_distances.resize(m);
                    for (std::size_t j = 0; j < m; ++j) {
                        signals.raw_distances[j] = min_distance_to_cluster(standardized[i], model.clusters[j], *spec.measure);
                    }
                    signals.norm_distances = normalize_distances(signals.raw_distances, norm);
                    cached = spec.measure;
                }
                out[r][i] = combine(*spec.approach, signals);
            }
        }
        return out;
    }

} // namespace

SplitReport run_experiment(const Dataset& data, const ExperimentOptions& options, unsigned threads)
{
    options.megp.validate();
    data.check();
    const auto splits = rolling_splits(data.rows(), options.folds);

    std::vector<MethodSpec> rows { MethodSpec {} };
    for (const auto& spec : options.rows) {
        if (spec.approach && uses_distance(*spec.approach) && !spec.measure) {
            throw InputError("method " + spec.label() + " needs a distance measure");
        }
        if (std::find(rows.begin(), rows.end(), spec) == rows.end()) {
            rows.push_back(spec);
        }
    }
    // Group rows by measure so distance scans are shared within a split.
    std::stable_sort(rows.begin() + 1, rows.end(), [](const MethodSpec& l, const MethodSpec& r) {
        auto rank = [](const MethodSpec& s) { return s.measure ? static_cast<int>(*s.measure) + 1 : 0; };
        return rank(l) < rank(r);
    });
    const bool any_megp = rows.size() > 1;

    SplitReport report;
    report.folds = options.folds;
    report.signed_rank = options.signed_rank;
    report.rows.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        report.rows[r].method = rows[r];
    }

    const auto master = options.megp.gp.seed;
    for (std::size_t s = 0; s < splits.size(); ++s) {
        const auto& split = splits[s];
        const Dataset train = data.slice(split.train_begin, split.train_end);
        const Dataset test = data.slice(split.test_begin, split.test_end);

        GpConfig std_config = options.megp.gp;
        std_config.seed = derive_seed(master, 2 * s);
        const auto standard = best_of_runs(train, options.megp.runs_per_cluster, std_config, threads);
        std::vector<double> std_pred(test.rows());
        evaluate_batch(standard.expression, test.columns(), std_pred);

        SplitSummary summary { .split = split, .gp_std_expression = serialize(standard.expression) };
        std::vector<std::vector<double>> predictions(rows.size());
        predictions[0] = std_pred;
        if (any_megp) {
            MegpConfig megp_config = options.megp;
            megp_config.gp.seed = derive_seed(master, 2 * s + 1);
            const auto model = cluster(train, megp_config, threads);
            summary.clusters = model.clusters.size();
            summary.leftover = model.leftover_count;
            for (const auto& c : model.clusters) {
                summary.epsilons.push_back(c.epsilon);
                summary.cluster_sizes.push_back(c.member_count);
            }
            auto megp_rows = megp_predictions(model, test, rows, options.norm);
            for (std::size_t r = 1; r < rows.size(); ++r) {
                predictions[r] = std::move(megp_rows[r]);
            }
        }
        report.splits.push_back(std::move(summary));

        const auto std_errors = absolute_errors(test.target, std_pred);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            auto& row = report.rows[r];
            auto errors = absolute_errors(test.target, predictions[r]);
            row.split_mae.push_back(mae(test.target, predictions[r]));
            const auto t = options.signed_rank ? wilcoxon_signed_rank(std_errors, errors)
                                               : wilcoxon_rank_sum(std_errors, errors);
            row.p_values.push_back(t.p_value);
            row.statistics.push_back(t.statistic);
            row.abs_errors.push_back(std::move(errors));
        }
    }

    const auto& baseline = report.rows[0];
    const double std_mean = std::accumulate(baseline.split_mae.begin(), baseline.split_mae.end(), 0.0)
        / static_cast<double>(baseline.split_mae.size());
    const double std_sd = sample_sd(baseline.split_mae);
    for (auto& row : report.rows) {
        row.mean = std::accumulate(row.split_mae.begin(), row.split_mae.end(), 0.0) / static_cast<double>(row.split_mae.size());
        row.sd = sample_sd(row.split_mae);
        for (std::size_t s = 0; s < row.split_mae.size(); ++s) {
            row.improvement.push_back(safe_improvement(baseline.split_mae[s], row.split_mae[s]));
        }
        row.mean_improvement = safe_improvement(std_mean, row.mean);
        row.sd_improvement = safe_improvement(std_sd, row.sd);
    }
    return report;
}

namespace {

    std::string cell(double v) { return fmt::format("{:.2f}", v); }

    std::string percent_cell(const std::optional<double>& v)
    {
        return v ? fmt::format("{:.2f}%", *v) : std::string("-");
    }

    std::string csv_field(const std::string& s)
    {
        if (s.find_first_of(",\"\n") == std::string::npos) {
            return s;
        }
        std::string out = "\"";
        for (char c : s) {
            out += c;
            if (c == '"') {
                out += '"';
            }
        }
        return out + "\"";
    }

    std::string split_header(std::size_t folds)
    {
        std::string h;
        for (std::size_t s = 1; s <= folds; ++s) {
            h += fmt::format(",S{}", s);
        }
        return h + ",Mean,SD\n";
    }

    nlohmann::json optional_number(const std::optional<double>& v)
    {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    }

    nlohmann::json finite_or_string(double v)
    {
        if (std::isfinite(v)) {
            return v;
        }
        return v > 0 ? "inf" : "-inf";
    }

} // namespace

std::string table3_csv(const SplitReport& report)
{
    std::string out = "Methods,Distance measure" + split_header(report.folds);
    for (const auto& row : report.rows) {
        out += csv_field(row.method.label()) + "," + row.method.measure_label();
        for (double v : row.split_mae) {
            out += "," + cell(v);
        }
        out += "," + cell(row.mean) + "," + cell(row.sd) + "\n";
    }
    return out;
}

std::string table4_csv(const SplitReport& report, const MethodRow& variant)
{
    const auto& baseline = report.rows.at(0);
    std::string out = "Methods" + split_header(report.folds);
    auto mae_row = [&](const MethodRow& row) {
        std::string label = row.method.label();
        if (row.method.measure) {
            label += "_" + row.method.measure_label();
        }
        out += csv_field(label);
        for (double v : row.split_mae) {
            out += "," + cell(v);
        }
        out += "," + cell(row.mean) + "," + cell(row.sd) + "\n";
    };
    mae_row(baseline);
    mae_row(variant);

    out += "% improvement";
    for (const auto& v : variant.improvement) {
        out += "," + percent_cell(v);
    }
    out += "," + percent_cell(variant.mean_improvement) + "," + percent_cell(variant.sd_improvement) + "\n";

    out += "P-value";
    for (double p : variant.p_values) {
        out += fmt::format(",{:.2E}", p);
    }
    out += ",-,-\n";
    return out;
}

std::string report_json(const SplitReport& report)
{
    nlohmann::json doc;
    doc["folds"] = report.folds;
    doc["test"] = report.signed_rank ? "wilcoxon-signed-rank" : "wilcoxon-rank-sum";
    doc["splits"] = nlohmann::json::array();
    for (const auto& s : report.splits) {
        nlohmann::json eps = nlohmann::json::array();
        for (double e : s.epsilons) {
            eps.push_back(finite_or_string(e));
        }
        doc["splits"].push_back({
            { "split", s.split.split_index },
            { "train", { s.split.train_begin, s.split.train_end } },
            { "test", { s.split.test_begin, s.split.test_end } },
            { "clusters", s.clusters },
            { "leftover", s.leftover },
            { "epsilons", eps },
            { "cluster_sizes", s.cluster_sizes },
            { "gp_std_expression", s.gp_std_expression },
        });
    }
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json improvement = nlohmann::json::array();
        for (const auto& v : row.improvement) {
            improvement.push_back(optional_number(v));
        }
        doc["rows"].push_back({
            { "method", row.method.key() },
            { "label", row.method.label() },
            { "measure", row.method.measure_label() },
            { "mae", row.split_mae },
            { "mean", row.mean },
            { "sd", row.sd },
            { "improvement_percent", improvement },
            { "mean_improvement_percent", optional_number(row.mean_improvement) },
            { "sd_improvement_percent", optional_number(row.sd_improvement) },
            { "p_values", row.p_values },
            { "statistics", row.statistics },
        });
    }
    if (const auto* best = report.best_variant()) {
        doc["best_variant"] = best->method.key();
    }
    return doc.dump(2) + "\n";
}

} // namespace megp
