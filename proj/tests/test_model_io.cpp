#include <doctest.h>

#include "megp/error.hpp"
#include "megp/model_io.hpp"
#include "support.hpp"

using namespace megp;

namespace {

MegpModel trained(std::uint64_t seed)
{
    MegpConfig cfg;
    cfg.gp.population_size = 40;
    cfg.gp.max_generations = 10;
    cfg.gp.seed = seed;
    cfg.runs_per_cluster = 2;
    return cluster(testing::two_regime(400, seed), cfg);
}

} // namespace

TEST_CASE("config JSON round trip")
{
    MegpConfig c;
    c.gp.population_size = 123;
    c.gp.constant_min = -5;
    c.gp.constant_max = 7.5;
    c.gp.seed = 18446744073709551615ULL;
    c.gp.run_selection_metric = RunSelectionMetric::Mae;
    c.runs_per_cluster = 4;
    c.standardize = false;
    MegpConfig back;
    merge_json(to_json(c), back);
    CHECK(to_json(back) == to_json(c));
    CHECK(back.gp.seed == c.gp.seed);

    CHECK_THROWS_AS(merge_json(nlohmann::json { { "bogus", 1 } }, back), InputError);
    CHECK_THROWS_AS(merge_json(nlohmann::json { { "gp", { { "population", 1 } } } }, back), InputError);
    CHECK_THROWS_AS(merge_json(nlohmann::json { { "gp", { { "constant_range", { 1 } } } } }, back), InputError);
}

TEST_CASE("model file round trip is exact")
{
    auto model = trained(3);
    auto text = dump_model(model);
    auto back = model_from_json(nlohmann::json::parse(text));
    CHECK(dump_model(back) == text);
    REQUIRE(back.clusters.size() == model.clusters.size());
    for (std::size_t j = 0; j < model.clusters.size(); ++j) {
        CHECK(back.clusters[j].equation == model.clusters[j].equation);
        CHECK(back.clusters[j].epsilon == model.clusters[j].epsilon);
        CHECK(back.clusters[j].member_features == model.clusters[j].member_features);
    }
    CHECK(back.feature_means == model.feature_means);
    CHECK(back.feature_stds == model.feature_stds);

    testing::TempDir dir;
    save_model(dir / "m.json", model);
    CHECK(testing::slurp(dir / "m.json") == text);
    CHECK(dump_model(load_model(dir / "m.json")) == text);
}

TEST_CASE("unbounded epsilon survives the round trip")
{
    auto d = testing::make_dataset(20, 2, 1, [](const double* x) { return x[0]; });
    auto model = single_equation_model(d, Expression::feature(0), MegpConfig {});
    auto doc = model_to_json(model);
    CHECK(doc["clusters"][0]["epsilon"] == "inf");
    CHECK(model_from_json(doc).clusters[0].epsilon == kUnboundedEpsilon);
}

TEST_CASE("malformed model documents are rejected")
{
    auto doc = model_to_json(trained(4));
    auto bad = doc;
    bad["clusters"][0]["expression"] = "(add x0";
    CHECK_THROWS_AS(model_from_json(bad), InputError);
    bad = doc;
    bad["clusters"][0]["member_count"] = 1;
    CHECK_THROWS_AS(model_from_json(bad), InputError);
    bad = doc;
    bad["feature_stds"] = { 1.0 };
    CHECK_THROWS_AS(model_from_json(bad), InputError);
    bad = doc;
    bad["clusters"] = nlohmann::json::array();
    CHECK_THROWS_AS(model_from_json(bad), InputError);
    bad = doc;
    bad["surprise"] = true;
    CHECK_THROWS_AS(model_from_json(bad), InputError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), InputError);
}
