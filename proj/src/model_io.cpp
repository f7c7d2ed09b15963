#include "megp/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "megp/error.hpp"

namespace megp {

namespace {

    void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed, const std::string& where)
    {
        if (!obj.is_object()) {
            throw InputError(where + " must be a JSON object");
        }
        for (const auto& [key, value] : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                throw InputError("unknown key '" + key + "' in " + where);
            }
        }
    }

    template <typename T>
    void take(const nlohmann::json& obj, const char* key, T& into)
    {
        if (obj.contains(key)) {
            try {
                into = obj.at(key).get<T>();
            } catch (const nlohmann::json::exception&) {
                throw InputError(std::string("key '") + key + "' has the wrong type");
            }
        }
    }

    const nlohmann::json& need(const nlohmann::json& obj, const char* key)
    {
        if (!obj.contains(key)) {
            throw InputError(std::string("model file is missing '") + key + "'");
        }
        return obj.at(key);
    }

    nlohmann::json epsilon_to_json(double eps)
    {
        if (std::isinf(eps)) {
            return "inf";
        }
        return eps;
    }

    double epsilon_from_json(const nlohmann::json& v)
    {
        if (v.is_string()) {
            if (v.get<std::string>() == "inf") {
                return kUnboundedEpsilon;
            }
            throw InputError("epsilon must be a number or \"inf\"");
        }
        return v.get<double>();
    }

} // namespace

nlohmann::json to_json(const GpConfig& c)
{
    return {
        { "population_size", c.population_size },
        { "max_generations", c.max_generations },
        { "init_depth_min", c.init_depth_min },
        { "init_depth_max", c.init_depth_max },
        { "p_crossover", c.p_crossover },
        { "p_mutation", c.p_mutation },
        { "tournament_size", c.tournament_size },
        { "parsimony_coefficient", c.parsimony_coefficient },
        { "constant_range", { c.constant_min, c.constant_max } },
        { "seed", c.seed },
        { "run_selection_metric", c.run_selection_metric == RunSelectionMetric::Rmse ? "rmse" : "mae" },
    };
}

void merge_json(const nlohmann::json& doc, GpConfig& c)
{
    reject_unknown(doc,
        { "population_size", "max_generations", "init_depth_min", "init_depth_max", "p_crossover", "p_mutation",
            "tournament_size", "parsimony_coefficient", "constant_range", "seed", "run_selection_metric" },
        "gp config");
    take(doc, "population_size", c.population_size);
    take(doc, "max_generations", c.max_generations);
    take(doc, "init_depth_min", c.init_depth_min);
    take(doc, "init_depth_max", c.init_depth_max);
    take(doc, "p_crossover", c.p_crossover);
    take(doc, "p_mutation", c.p_mutation);
    take(doc, "tournament_size", c.tournament_size);
    take(doc, "parsimony_coefficient", c.parsimony_coefficient);
    take(doc, "seed", c.seed);
    if (doc.contains("constant_range")) {
        std::vector<double> range;
        take(doc, "constant_range", range);
        if (range.size() != 2) {
            throw InputError("constant_range must be [min, max]");
        }
        c.constant_min = range[0];
        c.constant_max = range[1];
    }
    if (doc.contains("run_selection_metric")) {
        std::string metric;
        take(doc, "run_selection_metric", metric);
        if (metric == "rmse") {
            c.run_selection_metric = RunSelectionMetric::Rmse;
        } else if (metric == "mae") {
            c.run_selection_metric = RunSelectionMetric::Mae;
        } else {
            throw InputError("run_selection_metric must be 'rmse' or 'mae'");
        }
    }
}

nlohmann::json to_json(const MegpConfig& c)
{
    return {
        { "gp", to_json(c.gp) },
        { "runs_per_cluster", c.runs_per_cluster },
        { "min_remaining_fraction", c.min_remaining_fraction },
        { "max_clusters", c.max_clusters },
        { "standardize", c.standardize },
    };
}

void merge_json(const nlohmann::json& doc, MegpConfig& c)
{
    reject_unknown(doc, { "gp", "runs_per_cluster", "min_remaining_fraction", "max_clusters", "standardize" },
        "megp config");
    if (doc.contains("gp")) {
        merge_json(doc.at("gp"), c.gp);
    }
    take(doc, "runs_per_cluster", c.runs_per_cluster);
    take(doc, "min_remaining_fraction", c.min_remaining_fraction);
    take(doc, "max_clusters", c.max_clusters);
    take(doc, "standardize", c.standardize);
}

nlohmann::json model_to_json(const MegpModel& model)
{
    nlohmann::json clusters = nlohmann::json::array();
    const auto d = model.n_features();
    for (const auto& c : model.clusters) {
        nlohmann::json members = nlohmann::json::array();
        for (std::size_t i = 0; i < c.member_count; ++i) {
            const auto row = c.member(i, d);
            members.push_back(std::vector<double>(row.begin(), row.end()));
        }
        clusters.push_back({
            { "expression", serialize(c.equation) },
            { "epsilon", epsilon_to_json(c.epsilon) },
            { "member_count", c.member_count },
            { "member_features", members },
            { "member_indices", c.member_indices },
            { "iteration_index", c.iteration_index },
        });
    }
    return {
        { "clusters", clusters },
        { "feature_names", model.feature_names },
        { "target_name", model.target_name },
        { "feature_means", model.feature_means },
        { "feature_stds", model.feature_stds },
        { "leftover_count", model.leftover_count },
        { "config", to_json(model.config) },
    };
}

MegpModel model_from_json(const nlohmann::json& doc)
{
    try {
        reject_unknown(doc,
            { "clusters", "feature_names", "target_name", "feature_means", "feature_stds", "leftover_count", "config" },
            "model file");
        MegpModel model;
        model.feature_names = need(doc, "feature_names").get<std::vector<std::string>>();
        model.target_name = need(doc, "target_name").get<std::string>();
        model.feature_means = need(doc, "feature_means").get<std::vector<double>>();
        model.feature_stds = need(doc, "feature_stds").get<std::vector<double>>();
        model.leftover_count = need(doc, "leftover_count").get<std::size_t>();
        merge_json(need(doc, "config"), model.config);

        const auto d = model.feature_means.size();
        if (model.feature_stds.size() != d || model.feature_names.size() != d) {
            throw InputError("model feature statistics disagree in length");
        }
        for (double s : model.feature_stds) {
            if (!(s > 0.0)) {
                throw InputError("model feature_stds must be positive");
            }
        }
        for (const auto& c : need(doc, "clusters")) {
            reject_unknown(c,
                { "expression", "epsilon", "member_count", "member_features", "member_indices", "iteration_index" },
                "cluster");
            ClusterModel cm { .equation = parse(need(c, "expression").get<std::string>()) };
            cm.epsilon = epsilon_from_json(need(c, "epsilon"));
            cm.member_count = need(c, "member_count").get<std::size_t>();
            cm.iteration_index = need(c, "iteration_index").get<std::size_t>();
            if (c.contains("member_indices")) {
                cm.member_indices = c.at("member_indices").get<std::vector<std::size_t>>();
            }
            for (const auto& row : need(c, "member_features")) {
                const auto values = row.get<std::vector<double>>();
                if (values.size() != d) {
                    throw InputError("cluster member has the wrong number of features");
                }
                cm.member_features.insert(cm.member_features.end(), values.begin(), values.end());
            }
            if (cm.member_count < 1 || cm.member_features.size() != cm.member_count * d) {
                throw InputError("cluster member_count does not match member_features");
            }
            if (auto f = cm.equation.max_feature(); f && *f >= d) {
                throw InputError("cluster equation references a feature beyond the model's feature count");
            }
            model.clusters.push_back(std::move(cm));
        }
        if (model.clusters.empty()) {
            throw InputError("model has no clusters");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed model file: ") + e.what());
    }
}

std::string dump_model(const MegpModel& model) { return model_to_json(model).dump(2) + "\n"; }

void save_model(const std::filesystem::path& path, const MegpModel& model)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << dump_model(model);
}

MegpModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw InputError("model file is not valid JSON: " + std::string(e.what()));
    }
    return model_from_json(doc);
}

} // namespace megp
