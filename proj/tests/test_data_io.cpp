#include <doctest.h>

#include <cmath>
#include <random>

#include "megp/data_io.hpp"
#include "megp/error.hpp"
#include "support.hpp"

using namespace megp;

TEST_CASE("load: feature names follow the header minus the target")
{
    auto r = parse_csv("a,b,y\n1,2,3\n4,5,6\n", { "y" });
    CHECK(r.data.feature_names == std::vector<std::string> { "a", "b" });
    CHECK(r.data.target == std::vector<double> { 3, 6 });
    CHECK(r.data.features == std::vector<double> { 1, 2, 4, 5 });
    CHECK(r.dropped_rows == 0);
}

TEST_CASE("load: rows with blank or non-numeric cells are dropped")
{
    auto r = parse_csv("a,b,y\n1,2,3\n4,,6\n7,8,9\n", { "y" });
    CHECK(r.data.rows() == 2);
    CHECK(r.dropped_rows == 1);
    CHECK(r.data.target == std::vector<double> { 3, 9 });
    auto s = parse_csv("a,y\n1,x\n2,nan\n3,inf\n4,5\n", { "y" });
    CHECK(s.data.rows() == 1);
    CHECK(s.dropped_rows == 3);
}

TEST_CASE("load: quoting, CRLF and explicit selections")
{
    auto r = parse_csv("\"a,1\",\"note\",y\r\n1,\"x \"\"q\"\"\",2\r\n3,text,4\r\n", { "y", { "a,1" } });
    CHECK(r.data.feature_names == std::vector<std::string> { "a,1" });
    CHECK(r.data.rows() == 2);
    auto aux = parse_csv("x0,y,regime\n1,2,0\n3,4,1\n", { "y", {}, { "regime", "absent" } });
    CHECK(aux.data.feature_names == std::vector<std::string> { "x0" });
    CHECK(aux.data.aux_names == std::vector<std::string> { "regime" });
    CHECK(aux.data.aux[0] == std::vector<double> { 0, 1 });
}

TEST_CASE("load: errors")
{
    CHECK_THROWS_AS(parse_csv("a,b\n1,2\n", { "y" }), InputError);
    CHECK_THROWS_AS(parse_csv("a,y\n1,2\n", { "y", { "zz" } }), InputError);
    CHECK_THROWS_AS(parse_csv("", { "y" }), InputError);
    CHECK_THROWS_AS(parse_csv("a,y\n\"1,2\n", { "y" }), InputError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", { "y" }), InputError);
    auto optional = parse_csv("a,b\n1,2\n", { "y", {}, {}, false });
    CHECK_FALSE(optional.has_target);
    CHECK(optional.data.feature_names == std::vector<std::string> { "a", "b" });
}

TEST_CASE("save/load round trip keeps every bit")
{
    testing::TempDir dir;
    Dataset d;
    d.feature_names = { "a", "b" };
    d.target_name = "y";
    d.aux_names = { "regime" };
    d.aux = { {} };
    Rng rng(1);
    std::normal_distribution<double> g(0, 1e3);
    for (int i = 0; i < 300; ++i) {
        const double x[] = { g(rng), g(rng) * 1e-9 };
        d.add_row(x, g(rng) / 3);
        d.aux[0].push_back(i % 2);
    }
    save_csv(dir / "d.csv", d);
    auto back = load_csv(dir / "d.csv", { "y", {}, { "regime" } }).data;
    CHECK(back.feature_names == d.feature_names);
    CHECK(back.features == d.features);
    CHECK(back.target == d.target);
    CHECK(back.aux == d.aux);
}

namespace {

Dataset plant_like()
{
    Dataset d;
    d.feature_names = { "speed", "pct", "power" };
    d.target_name = "y";
    const double rows[][4] = {
        { 1, 50, 1, 1 },
        { -1, 50, 1, 2 },  // negative speed
        { 2, 104, 1, 3 },  // percent > 100
        { 3, 40, 1, 4 },
        { 4, 30, 1, 5 },
        { 5, 20, 1, 6 },
        { 6, 10, 1, 7 },
        { 7, 60, 1, 8 },
        { 8, 70, 1, 9 },
        { 9, 80, 1, 10 },
        { 10, 90, 100, 11 }, // power outlier
    };
    for (const auto& r : rows) {
        d.add_row(std::span<const double>(r, 3), r[3]);
    }
    return d;
}

} // namespace

TEST_CASE("clean: each rule removes its rows")
{
    auto d = plant_like();
    CleaningRules rules;
    rules.nonnegative_columns = { "speed" };
    rules.percent_columns = { "pct" };
    rules.outlier_column = "power";
    auto r = clean(d, rules);
    CHECK(r.report.input_rows == 11);
    CHECK(r.report.removed_nonnegative == 1);
    CHECK(r.report.removed_percent == 1);
    CHECK(r.report.removed_outlier == 1);
    CHECK(r.report.removed_total == 3);
    CHECK(r.data.rows() == 8);
    for (double y : r.data.target) {
        CHECK(y != 2);
        CHECK(y != 3);
        CHECK(y != 11);
    }
    REQUIRE(r.report.fences);
    CHECK(r.report.fences->q1 == 1);
    CHECK(r.report.fences->q3 == 1);
}

TEST_CASE("clean: ten ones and a hundred")
{
    Dataset d;
    d.feature_names = { "p" };
    d.target_name = "y";
    for (int i = 0; i < 10; ++i) {
        const double x[] = { 1.0 };
        d.add_row(x, i);
    }
    const double big[] = { 100.0 };
    d.add_row(big, 10);
    CleaningRules rules;
    rules.outlier_column = "p";
    auto r = clean(d, rules);
    CHECK(r.data.rows() == 10);
    CHECK(r.report.removed_outlier == 1);
}

TEST_CASE("clean: unknown columns and bad multipliers are input errors")
{
    auto d = plant_like();
    CleaningRules rules;
    rules.nonnegative_columns = { "nope" };
    CHECK_THROWS_WITH_AS(clean(d, rules), doctest::Contains("nope"), InputError);
    CleaningRules bad;
    bad.iqr_multiplier = 0;
    CHECK_THROWS_AS(clean(d, bad), InputError);
}

TEST_CASE("clean is idempotent with frozen fences")
{
    Rng rng(3);
    std::normal_distribution<double> g(50, 20);
    Dataset d;
    d.feature_names = { "power", "pct" };
    d.target_name = "y";
    for (int i = 0; i < 500; ++i) {
        const double x[] = { g(rng), g(rng) };
        d.add_row(x, g(rng));
    }
    CleaningRules rules;
    rules.percent_columns = { "pct" };
    rules.outlier_column = "power";
    rules.iqr_multiplier = 1.0;
    auto first = clean(d, rules);
    CHECK(first.report.removed_total > 0);
    auto frozen = rules;
    frozen.frozen_fences = first.report.fences;
    auto second = clean(first.data, frozen);
    CHECK(second.report.removed_total == 0);
    CHECK(second.data.features == first.data.features);
}

TEST_CASE("quantile uses linear interpolation")
{
    CHECK(quantile({ 1, 2, 3, 4 }, 0.25) == 1.75);
    CHECK(quantile({ 5 }, 0.75) == 5);
    CHECK(quantile({ 3, 1, 2 }, 0.5) == 2);
}

TEST_CASE("describe")
{
    Dataset d;
    d.feature_names = { "a", "c", "a2" };
    d.target_name = "y";
    const double rows[][4] = { { 1, 7, 1, 2 }, { 2, 7, 2, 1 }, { 3, 7, 3, 5 } };
    for (const auto& r : rows) {
        d.add_row(std::span<const double>(r, 3), r[3]);
    }
    auto s = describe(d);
    REQUIRE(s.columns.size() == 4);
    CHECK(s.columns[0].min == 1);
    CHECK(s.columns[0].max == 3);
    CHECK(s.columns[0].mean == 2);
    CHECK(s.columns[0].sd == 1);
    CHECK(s.columns[1].sd == 0);
    CHECK(s.correlation[1][0] == 0);
    CHECK(s.correlation[0][1] == 0);
    CHECK(s.correlation[1][1] == 0);
    CHECK(s.correlation[0][2] == doctest::Approx(1));
    CHECK(s.correlation[0][0] == 1);
    auto csv = s.to_csv();
    CHECK(csv.rfind("Variable,Min,Max,Mean,SD,r(a),r(c),r(a2),r(y)\n", 0) == 0);
}

TEST_CASE("describe matches a two-pass oracle on table-like data")
{
    Rng rng(4);
    std::normal_distribution<double> g(1000, 150);
    Dataset d;
    d.feature_names = { "power", "speed", "water", "size" };
    d.target_name = "throughput";
    for (int i = 0; i < 2000; ++i) {
        const double x[] = { g(rng), g(rng) / 100, g(rng) / 7, g(rng) * 0.3 };
        d.add_row(x, x[0] * 1.5 - x[3] + g(rng) * 0.1);
    }
    auto s = describe(d);
    for (std::size_t c = 0; c < 5; ++c) {
        auto col = c < 4 ? d.column(d.feature_names[c]) : d.target;
        long double sum = 0;
        for (double v : col) {
            sum += v;
        }
        const long double mean = sum / col.size();
        long double ss = 0;
        for (double v : col) {
            ss += (v - mean) * (v - mean);
        }
        const double sd = static_cast<double>(std::sqrt(ss / (col.size() - 1)));
        CHECK(std::abs(s.columns[c].mean - static_cast<double>(mean)) < 1e-9 * std::abs(static_cast<double>(mean)));
        CHECK(std::abs(s.columns[c].sd - sd) < 1e-9 * sd);
    }
}

TEST_CASE("synth_regimes")
{
    SUBCASE("noise-free single regime")
    {
        SynthSpec spec { 200, 2, { { "(add x0 x1)", 1.0, 0.0 } } };
        auto d = synth_regimes(spec, 1);
        REQUIRE(d.rows() == 200);
        for (std::size_t i = 0; i < d.rows(); ++i) {
            CHECK(d.target[i] == d.row(i)[0] + d.row(i)[1]);
            CHECK(d.row(i)[0] >= 0);
            CHECK(d.row(i)[0] <= 10);
        }
    }
    SUBCASE("boundary at the span fraction and label column")
    {
        SynthSpec spec { 100, 1, { { "x0", 0.5, 0.1 }, { "(mul -1 x0)", 0.5, 0.1 } } };
        auto d = synth_regimes(spec, 2);
        REQUIRE(d.aux_names == std::vector<std::string> { "regime" });
        CHECK(d.aux[0][49] == 0);
        CHECK(d.aux[0][50] == 1);
        CHECK(d.feature_names == std::vector<std::string> { "x0" });
    }
    SUBCASE("bit-identical for a fixed seed")
    {
        auto a = testing::two_regime(500, 9);
        auto b = testing::two_regime(500, 9);
        auto c = testing::two_regime(500, 10);
        CHECK(a.features == b.features);
        CHECK(a.target == b.target);
        CHECK(a.target != c.target);
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(synth_regimes({ 10, 1, { { "(add x0", 1.0, 0 } } }, 1), ParseError);
        CHECK_THROWS_AS(synth_regimes({ 10, 1, { { "x0", 0.4, 0 } } }, 1), InputError);
        CHECK_THROWS_AS(synth_regimes({ 10, 1, { { "x3", 1.0, 0 } } }, 1), InputError);
        CHECK_THROWS_AS(SynthSpec::from_json(R"({"n_points": 5, "n_features": 1, "regimes": [], "x": 1})"), InputError);
    }
    SUBCASE("json spec with feature ranges")
    {
        auto spec = SynthSpec::from_json(R"({"n_points": 50, "n_features": 1, "regimes": [
            {"formula": "x0", "span": 1.0, "noise_sd": 0, "feature_range": [20, 30], "label": 7}]})");
        auto d = synth_regimes(spec, 3);
        for (std::size_t i = 0; i < d.rows(); ++i) {
            CHECK(d.row(i)[0] >= 20);
            CHECK(d.row(i)[0] <= 30);
            CHECK(d.aux[0][i] == 7);
        }
    }
}
