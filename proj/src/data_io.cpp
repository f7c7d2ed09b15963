#include "megp/data_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "megp/error.hpp"
#include "megp/random.hpp"

namespace megp {

namespace {

    using Record = std::vector<std::string>;

    std::vector<Record> split_records(const std::string& text)
    {
        std::vector<Record> records;
        Record current;
        std::string field;
        bool quoted = false;
        bool any = false;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field += '"';
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    field += c;
                }
                continue;
            }
            if (c == '"') {
                quoted = true;
                any = true;
            } else if (c == ',') {
                current.push_back(std::move(field));
                field.clear();
                any = true;
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                    ++i;
                }
                if (any || !field.empty()) {
                    current.push_back(std::move(field));
                    records.push_back(std::move(current));
                }
                current.clear();
                field.clear();
                any = false;
            } else {
                field += c;
                any = true;
            }
        }
        if (quoted) {
            throw InputError("unterminated quoted CSV field");
        }
        if (any || !field.empty()) {
            current.push_back(std::move(field));
            records.push_back(std::move(current));
        }
        return records;
    }

    std::optional<double> parse_number(std::string_view s)
    {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
            s.remove_prefix(1);
        }
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
            s.remove_suffix(1);
        }
        if (!s.empty() && s.front() == '+') {
            s.remove_prefix(1);
        }
        if (s.empty()) {
            return std::nullopt;
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc {} || ptr != s.data() + s.size() || !std::isfinite(v)) {
            return std::nullopt;
        }
        return v;
    }

    std::string format_number(double v)
    {
        std::array<char, 64> buf {};
        auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
        return std::string(buf.data(), end);
    }

    std::string csv_field(const std::string& s)
    {
        if (s.find_first_of(",\"\r\n") == std::string::npos) {
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

    std::string read_file(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw InputError("cannot read '" + path.string() + "'");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    void write_file(const std::filesystem::path& path, const std::string& text)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw InputError("cannot write '" + path.string() + "'");
        }
        out << text;
    }

    template <typename T>
    T required(const nlohmann::json& obj, const char* key)
    {
        if (!obj.contains(key)) {
            throw InputError(std::string("missing key '") + key + "'");
        }
        return obj.at(key).get<T>();
    }

    void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed, const char* where)
    {
        for (const auto& [key, value] : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                throw InputError("unknown key '" + key + "' in " + where);
            }
        }
    }

} // namespace

CsvLoadResult parse_csv(const std::string& text, const CsvLoadOptions& options)
{
    auto records = split_records(text);
    if (records.empty()) {
        throw InputError("CSV has no header row");
    }
    const Record header = records.front();
    auto index_of = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - header.begin());
    };

    const auto target = index_of(options.target);
    if (!target && options.require_target) {
        throw InputError("target column '" + options.target + "' not found");
    }
    const auto skip_column = target.value_or(header.size());

    std::vector<std::string> aux_names;
    std::vector<std::size_t> aux_cols;
    for (const auto& name : options.aux) {
        if (auto i = index_of(name); i && name != options.target) {
            aux_names.push_back(name);
            aux_cols.push_back(*i);
        }
    }

    std::vector<std::string> feature_names;
    std::vector<std::size_t> feature_cols;
    if (options.features.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c != skip_column && std::find(aux_cols.begin(), aux_cols.end(), c) == aux_cols.end()) {
                feature_names.push_back(header[c]);
                feature_cols.push_back(c);
            }
        }
    } else {
        for (const auto& name : options.features) {
            auto i = index_of(name);
            if (!i) {
                throw InputError("feature column '" + name + "' not found");
            }
            feature_names.push_back(name);
            feature_cols.push_back(*i);
        }
    }

    CsvLoadResult result;
    result.has_target = target.has_value();
    auto& data = result.data;
    data.feature_names = feature_names;
    data.target_name = options.target;
    data.aux_names = aux_names;
    data.aux.resize(aux_names.size());

    std::vector<double> x(feature_cols.size());
    std::vector<double> aux_values(aux_cols.size());
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        auto cell = [&](std::size_t c) -> std::optional<double> {
            if (c >= rec.size()) {
                return std::nullopt;
            }
            return parse_number(rec[c]);
        };
        bool ok = true;
        for (std::size_t f = 0; f < feature_cols.size() && ok; ++f) {
            auto v = cell(feature_cols[f]);
            ok = v.has_value();
            x[f] = v.value_or(0.0);
        }
        for (std::size_t a = 0; a < aux_cols.size() && ok; ++a) {
            auto v = cell(aux_cols[a]);
            ok = v.has_value();
            aux_values[a] = v.value_or(0.0);
        }
        const auto y = target ? cell(*target) : std::optional<double>(0.0);
        if (!ok || !y) {
            ++result.dropped_rows;
            continue;
        }
        data.add_row(x, *y);
        for (std::size_t a = 0; a < aux_cols.size(); ++a) {
            data.aux[a].push_back(aux_values[a]);
        }
    }
    return result;
}

CsvLoadResult load_csv(const std::filesystem::path& path, const CsvLoadOptions& options)
{
    return parse_csv(read_file(path), options);
}

std::string to_csv(const Dataset& data)
{
    data.check();
    std::string out;
    std::vector<std::string> header = data.feature_names;
    header.push_back(data.target_name);
    header.insert(header.end(), data.aux_names.begin(), data.aux_names.end());
    for (std::size_t c = 0; c < header.size(); ++c) {
        out += (c ? "," : "") + csv_field(header[c]);
    }
    out += '\n';
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto r = data.row(i);
        for (std::size_t f = 0; f < r.size(); ++f) {
            out += format_number(r[f]);
            out += ',';
        }
        out += format_number(data.target[i]);
        for (const auto& col : data.aux) {
            out += ',';
            out += format_number(col[i]);
        }
        out += '\n';
    }
    return out;
}

void save_csv(const std::filesystem::path& path, const Dataset& data) { write_file(path, to_csv(data)); }

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) {
        throw InputError("quantile of an empty column");
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::string RemovalReport::to_json() const
{
    nlohmann::json doc {
        { "input_rows", input_rows },
        { "output_rows", output_rows },
        { "removed", { { "nonnegative", removed_nonnegative }, { "percent", removed_percent }, { "outlier", removed_outlier } } },
        { "removed_total", removed_total },
    };
    if (fences) {
        doc["fences"] = {
            { "column", fences->column },
            { "q1", fences->q1 },
            { "q3", fences->q3 },
            { "multiplier", fences->multiplier },
            { "lower", fences->lower },
            { "upper", fences->upper },
        };
    } else {
        doc["fences"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

CleanResult clean(const Dataset& data, const CleaningRules& rules)
{
    data.check();
    if (!(rules.iqr_multiplier > 0.0)) {
        throw InputError("IQR multiplier must be positive");
    }
    const auto n = data.rows();
    std::vector<bool> drop(n, false);
    RemovalReport report { .input_rows = n };

    std::vector<bool> hit(n, false);
    for (const auto& name : rules.nonnegative_columns) {
        const auto col = data.column(name);
        for (std::size_t i = 0; i < n; ++i) {
            hit[i] = hit[i] || col[i] < 0.0;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        report.removed_nonnegative += hit[i];
        drop[i] = drop[i] || hit[i];
    }

    std::fill(hit.begin(), hit.end(), false);
    for (const auto& name : rules.percent_columns) {
        const auto col = data.column(name);
        for (std::size_t i = 0; i < n; ++i) {
            hit[i] = hit[i] || col[i] < 0.0 || col[i] > 100.0;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        report.removed_percent += hit[i];
        drop[i] = drop[i] || hit[i];
    }

    if (rules.outlier_column || rules.frozen_fences) {
        OutlierFences fences;
        if (rules.frozen_fences) {
            fences = *rules.frozen_fences;
        } else {
            const auto col = data.column(*rules.outlier_column);
            fences.column = *rules.outlier_column;
            fences.multiplier = rules.iqr_multiplier;
            if (!col.empty()) {
                fences.q1 = quantile(col, 0.25);
                fences.q3 = quantile(col, 0.75);
            }
            const double iqr = fences.q3 - fences.q1;
            fences.lower = fences.q1 - fences.multiplier * iqr;
            fences.upper = fences.q3 + fences.multiplier * iqr;
        }
        const auto col = data.column(fences.column);
        for (std::size_t i = 0; i < n; ++i) {
            const bool out = col[i] < fences.lower || col[i] > fences.upper;
            report.removed_outlier += out;
            drop[i] = drop[i] || out;
        }
        report.fences = fences;
    }

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (!drop[i]) {
            keep.push_back(i);
        }
    }
    report.output_rows = keep.size();
    report.removed_total = n - keep.size();
    return { data.subset(keep), report };
}

Description describe(const Dataset& data)
{
    data.check();
    if (data.rows() == 0) {
        throw InputError("cannot describe an empty dataset");
    }
    std::vector<std::string> names = data.feature_names;
    names.push_back(data.target_name);
    std::vector<std::vector<double>> cols;
    for (const auto& name : data.feature_names) {
        cols.push_back(data.column(name));
    }
    cols.push_back(data.target);

    const auto n = static_cast<double>(data.rows());
    Description d;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& v = cols[c];
        ColumnStats s { .name = names[c] };
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        s.min = *lo;
        s.max = *hi;
        s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) {
            ss += (x - s.mean) * (x - s.mean);
        }
        s.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        d.columns.push_back(s);
    }

    const auto k = cols.size();
    d.correlation.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            double sab = 0.0;
            double saa = 0.0;
            double sbb = 0.0;
            for (std::size_t i = 0; i < data.rows(); ++i) {
                const double da = cols[a][i] - d.columns[a].mean;
                const double db = cols[b][i] - d.columns[b].mean;
                sab += da * db;
                saa += da * da;
                sbb += db * db;
            }
            double r = 0.0;
            if (saa > 0.0 && sbb > 0.0) {
                r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
            }
            if (a == b) {
                r = 1.0;
            }
            d.correlation[a][b] = r;
            d.correlation[b][a] = r;
        }
    }
    // a constant column has no defined correlation, including with itself
    for (std::size_t a = 0; a < k; ++a) {
        if (d.columns[a].sd == 0.0) {
            d.correlation[a][a] = 0.0;
        }
    }
    return d;
}

std::string Description::to_csv() const
{
    std::string out = "Variable,Min,Max,Mean,SD";
    for (const auto& c : columns) {
        out += ",r(" + csv_field(c.name) + ")";
    }
    out += '\n';
    for (std::size_t a = 0; a < columns.size(); ++a) {
        const auto& c = columns[a];
        out += csv_field(c.name) + "," + format_number(c.min) + "," + format_number(c.max) + "," + format_number(c.mean)
            + "," + format_number(c.sd);
        for (double r : correlation[a]) {
            out += "," + format_number(r);
        }
        out += '\n';
    }
    return out;
}

SynthSpec SynthSpec::from_json(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid synthetic spec JSON: ") + e.what());
    }
    try {
        reject_unknown(doc, { "n_points", "n_features", "regimes" }, "synthetic spec");
        SynthSpec spec;
        spec.n_points = required<std::size_t>(doc, "n_points");
        spec.n_features = required<std::size_t>(doc, "n_features");
        for (const auto& r : required<nlohmann::json>(doc, "regimes")) {
            reject_unknown(r, { "formula", "span", "noise_sd", "feature_range", "label" }, "regime");
            RegimeSpec regime;
            regime.formula = required<std::string>(r, "formula");
            regime.span = required<double>(r, "span");
            regime.noise_sd = r.value("noise_sd", 0.0);
            if (r.contains("feature_range")) {
                const auto range = r.at("feature_range").get<std::vector<double>>();
                if (range.size() != 2) {
                    throw InputError("feature_range must be [min, max]");
                }
                regime.feature_min = range[0];
                regime.feature_max = range[1];
            }
            if (r.contains("label")) {
                regime.label = r.at("label").get<double>();
            }
            spec.regimes.push_back(regime);
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid synthetic spec: ") + e.what());
    }
}

SynthSpec SynthSpec::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

Dataset synth_regimes(const SynthSpec& spec, std::uint64_t seed)
{
    if (spec.regimes.empty()) {
        throw InputError("synthetic spec needs at least one regime");
    }
    if (spec.n_features < 1) {
        throw InputError("synthetic spec needs at least one feature");
    }
    double total = 0.0;
    std::vector<Expression> formulas;
    for (const auto& r : spec.regimes) {
        if (!(r.span >= 0.0) || !(r.noise_sd >= 0.0) || !(r.feature_min <= r.feature_max)) {
            throw InputError("regime needs span >= 0, noise_sd >= 0 and an ordered feature range");
        }
        total += r.span;
        formulas.push_back(parse(r.formula));
        if (auto f = formulas.back().max_feature(); f && *f >= spec.n_features) {
            throw InputError("formula '" + r.formula + "' references a feature beyond n_features");
        }
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InputError("regime spans must sum to 1");
    }

    std::vector<std::size_t> ends;
    double cumulative = 0.0;
    for (std::size_t j = 0; j < spec.regimes.size(); ++j) {
        cumulative += spec.regimes[j].span;
        ends.push_back(j + 1 == spec.regimes.size()
                ? spec.n_points
                : std::min(spec.n_points, static_cast<std::size_t>(std::llround(cumulative * static_cast<double>(spec.n_points)))));
    }

    Dataset data;
    for (std::size_t f = 0; f < spec.n_features; ++f) {
        data.feature_names.push_back("x" + std::to_string(f));
    }
    data.target_name = "y";
    data.aux_names = { "regime" };
    data.aux.resize(1);

    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> x(spec.n_features);
    std::size_t regime = 0;
    for (std::size_t i = 0; i < spec.n_points; ++i) {
        while (i >= ends[regime]) {
            ++regime;
        }
        const auto& r = spec.regimes[regime];
        std::uniform_real_distribution<double> uniform(r.feature_min, r.feature_max);
        for (auto& v : x) {
            v = uniform(rng);
        }
        const double eps = noise(rng);
        data.add_row(x, evaluate(formulas[regime], x) + r.noise_sd * eps);
        data.aux[0].push_back(r.label.value_or(static_cast<double>(regime)));
    }
    return data;
}

} // namespace megp
