#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "megp/error.hpp"
#include "megp/evaluation.hpp"
#include "megp/gp_engine.hpp"
#include "megp/model_io.hpp"

namespace megp::cli {

namespace {

    using nlohmann::json;

    struct DegenerateData : std::runtime_error {
        using std::runtime_error::runtime_error;
    };

    std::string read_text(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw InputError("cannot read '" + path.string() + "'");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    void write_text(const std::filesystem::path& path, const std::string& text)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw InputError("cannot write '" + path.string() + "'");
        }
        out << text;
    }

    std::vector<std::string> split_list(const std::string& text)
    {
        std::vector<std::string> items;
        std::string item;
        std::istringstream in(text);
        while (std::getline(in, item, ',')) {
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (!item.empty()) {
                items.push_back(item);
            }
        }
        return items;
    }

    std::vector<std::string> resolve_features(std::vector<std::string> names)
    {
        if (names.size() == 1 && names.front() == "plant") {
            return plant_features();
        }
        return names;
    }

    DistanceMeasure measure_from(const std::string& text)
    {
        auto m = parse_distance_measure(text);
        if (!m) {
            throw InputError("unknown distance measure '" + text + "'");
        }
        return *m;
    }

    PredictionApproach approach_from(const std::string& text)
    {
        auto a = parse_approach(text);
        if (!a) {
            throw InputError("unknown prediction approach '" + text + "'");
        }
        return *a;
    }

    DistanceNormalization norm_from(const std::string& text)
    {
        auto n = parse_normalization(text);
        if (!n) {
            throw InputError("unknown distance normalization '" + text + "'");
        }
        return *n;
    }

    Profile profile_from(const std::string& text)
    {
        if (text == "paper") {
            return Profile::Paper;
        }
        if (text == "fast") {
            return Profile::Fast;
        }
        throw InputError("unknown profile '" + text + "' (expected paper or fast)");
    }

    template <typename T>
    T get(const json& doc, const char* key)
    {
        try {
            return doc.at(key).get<T>();
        } catch (const json::exception& e) {
            throw InputError(std::string("config key '") + key + "': " + e.what());
        }
    }

    Dataset load(const std::filesystem::path& path, const RunConfig& config, std::ostream& err)
    {
        CsvLoadOptions options { config.target, config.features, config.aux_columns };
        auto result = load_csv(path, options);
        if (result.dropped_rows > 0) {
            err << "dropped " << result.dropped_rows << " rows with missing or non-numeric cells\n";
        }
        if (result.data.rows() == 0) {
            throw DegenerateData("'" + path.string() + "' has no usable rows");
        }
        return std::move(result.data);
    }

    std::string number(double v) { return fmt::format("{}", v); }

    std::filesystem::path prepare_output(const RunConfig& config)
    {
        std::filesystem::create_directories(config.output_dir);
        return config.output_dir;
    }

    void cmd_clean(const RunConfig& config, const std::string& input, const std::string& freeze_from,
        std::ostream& out, std::ostream& err)
    {
        auto rules = config.cleaning;
        // rule columns must be loaded even when they are not model features
        RunConfig load_config = config;
        if (!load_config.features.empty()) {
            auto add = [&](const std::string& name) {
                auto& f = load_config.features;
                if (name != config.target && std::find(f.begin(), f.end(), name) == f.end()) {
                    f.push_back(name);
                }
            };
            for (const auto& c : rules.nonnegative_columns) {
                add(c);
            }
            for (const auto& c : rules.percent_columns) {
                add(c);
            }
            if (rules.outlier_column) {
                add(*rules.outlier_column);
            }
        }
        if (!freeze_from.empty()) {
            auto doc = json::parse(read_text(freeze_from), nullptr, false);
            if (doc.is_discarded() || !doc.contains("fences") || !doc["fences"].is_object()) {
                throw InputError("'" + freeze_from + "' holds no outlier fences");
            }
            const auto& f = doc["fences"];
            rules.frozen_fences = OutlierFences { get<std::string>(f, "column"), get<double>(f, "q1"),
                get<double>(f, "q3"), get<double>(f, "multiplier"), get<double>(f, "lower"), get<double>(f, "upper") };
        }
        auto data = load(input, load_config, err);
        auto result = clean(data, rules);
        if (result.data.rows() == 0) {
            throw DegenerateData("cleaning removed every row");
        }
        auto dir = prepare_output(config);
        save_csv(dir / "cleaned.csv", result.data);
        write_text(dir / "report.json", result.report.to_json());
        out << "kept " << result.report.output_rows << " of " << result.report.input_rows << " rows\n";
    }

    void cmd_describe(const RunConfig& config, const std::string& input, std::ostream& out, std::ostream& err)
    {
        auto data = load(input, config, err);
        auto text = describe(data).to_csv();
        write_text(prepare_output(config) / "describe.csv", text);
        out << text;
    }

    void cmd_synth(const RunConfig& config, const std::string& spec_path, std::ostream& out)
    {
        auto spec = SynthSpec::load(spec_path);
        auto data = synth_regimes(spec, config.megp.gp.seed);
        save_csv(prepare_output(config) / "synth.csv", data);
        out << "wrote " << data.rows() << " rows\n";
    }

    void cmd_train(const RunConfig& config, const std::string& input, unsigned threads, std::ostream& out,
        std::ostream& err)
    {
        auto data = load(input, config, err);
        config.megp.validate();
        MegpModel model;
        if (config.mode == "std") {
            if (data.rows() < 2) {
                throw DegenerateData("standard GP needs at least 2 rows");
            }
            auto fitted = best_of_runs(data, config.megp.runs_per_cluster, config.megp.gp, threads);
            model = single_equation_model(data, fitted.expression, config.megp);
        } else if (config.mode == "megp") {
            if (static_cast<double>(data.rows()) * config.megp.min_remaining_fraction < 2.0) {
                throw DegenerateData(fmt::format("{} rows are too few for min_remaining_fraction {}", data.rows(),
                    config.megp.min_remaining_fraction));
            }
            model = cluster(data, config.megp, threads);
        } else {
            throw InputError("unknown mode '" + config.mode + "' (expected megp or std)");
        }
        save_model(prepare_output(config) / "model.json", model);
        out << "clusters: " << model.clusters.size() << "\n";
        for (std::size_t j = 0; j < model.clusters.size(); ++j) {
            const auto& c = model.clusters[j];
            out << "cluster " << j << ": size " << c.member_count << ", epsilon " << number(c.epsilon) << "\n";
        }
        out << "leftover: " << model.leftover_count << "\n";
    }

    void cmd_predict(const RunConfig& config, const std::string& model_path, const std::string& input,
        unsigned threads, std::ostream& out, std::ostream& err)
    {
        auto model = load_model(model_path);
        CsvLoadOptions options { model.target_name, model.feature_names, {}, false };
        auto loaded = load_csv(input, options);
        if (loaded.dropped_rows > 0) {
            err << "dropped " << loaded.dropped_rows << " rows with missing or non-numeric cells\n";
        }
        if (loaded.data.rows() == 0) {
            throw DegenerateData("'" + input + "' has no usable rows");
        }
        const auto& data = loaded.data;
        auto results = predict_batch(model, data, config.approach, config.measure, config.distance_norm, threads);

        std::string text = loaded.has_target ? "index,actual,predicted,approach,measure,best_cluster_index\n"
                                             : "index,predicted,approach,measure,best_cluster_index\n";
        const auto approach = std::string(to_string(config.approach));
        const auto measure = std::string(to_string(config.measure));
        for (std::size_t i = 0; i < results.size(); ++i) {
            text += std::to_string(i) + ",";
            if (loaded.has_target) {
                text += number(data.target[i]) + ",";
            }
            text += number(results[i].prediction) + "," + approach + "," + measure + ","
                + std::to_string(results[i].best_cluster) + "\n";
        }
        write_text(prepare_output(config) / "predictions.csv", text);
        out << "predicted " << results.size() << " rows\n";
    }

    void cmd_experiment(const RunConfig& config, const std::string& input, unsigned threads, std::ostream& out,
        std::ostream& err)
    {
        auto data = load(input, config, err);
        ExperimentOptions options;
        options.megp = config.megp;
        options.folds = config.folds;
        options.rows = expand_methods(config.methods, config.measures);
        options.norm = config.distance_norm;
        options.signed_rank = config.signed_rank;
        if (data.rows() < config.folds + 1) {
            throw DegenerateData(fmt::format("{} rows cannot form {} rolling splits", data.rows(), config.folds));
        }
        auto report = run_experiment(data, options, threads);

        const MethodRow* variant = nullptr;
        if (config.compare) {
            auto spec = parse_method(*config.compare);
            if (!spec || spec->is_standard()) {
                throw InputError("compare must name an MEGP method, got '" + *config.compare + "'");
            }
            variant = report.find(*spec);
            if (!variant) {
                throw InputError("compare method '" + *config.compare + "' is not among the experiment rows");
            }
        } else {
            variant = report.best_variant();
        }

        auto dir = prepare_output(config);
        auto t3 = table3_csv(report);
        write_text(dir / "table3.csv", t3);
        if (variant) {
            write_text(dir / "table4.csv", table4_csv(report, *variant));
        } else {
            err << "no MEGP rows requested; table4.csv not written\n";
        }
        write_text(dir / "report.json", report_json(report));
        out << t3;
    }

} // namespace

const std::vector<std::string>& plant_features()
{
    static const std::vector<std::string> names { "mill_power", "mill_speed", "inlet_water", "particle_size" };
    return names;
}

void apply_profile(Profile profile, RunConfig& config)
{
    config.profile = profile;
    auto& gp = config.megp.gp;
    if (profile == Profile::Paper) {
        gp.population_size = 200;
        gp.max_generations = 500;
        config.megp.runs_per_cluster = 30;
    } else {
        gp.population_size = 100;
        gp.max_generations = 50;
        config.megp.runs_per_cluster = 5;
    }
}

void merge_config(const std::string& json_text, RunConfig& config)
{
    auto doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw InputError("config must be a single JSON object");
    }
    static const std::vector<std::string> allowed { "profile", "megp", "cleaning", "folds", "methods", "measures",
        "distance_norm", "signed_rank", "compare", "seed", "target", "features", "aux_columns", "output_dir",
        "mode", "approach", "measure" };
    for (const auto& [key, value] : doc.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw InputError("unknown config key '" + key + "'");
        }
    }
    try {
        if (doc.contains("megp")) {
            merge_json(doc["megp"], config.megp);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("config key 'megp': ") + e.what());
    }
    if (doc.contains("cleaning")) {
        const auto& c = doc["cleaning"];
        for (const auto& [key, value] : c.items()) {
            if (key != "nonnegative_columns" && key != "percent_columns" && key != "outlier_column"
                && key != "iqr_multiplier") {
                throw InputError("unknown cleaning key '" + key + "'");
            }
        }
        if (c.contains("nonnegative_columns")) {
            config.cleaning.nonnegative_columns = get<std::vector<std::string>>(c, "nonnegative_columns");
        }
        if (c.contains("percent_columns")) {
            config.cleaning.percent_columns = get<std::vector<std::string>>(c, "percent_columns");
        }
        if (c.contains("outlier_column")) {
            if (c["outlier_column"].is_null()) {
                config.cleaning.outlier_column.reset();
            } else {
                config.cleaning.outlier_column = get<std::string>(c, "outlier_column");
            }
        }
        if (c.contains("iqr_multiplier")) {
            config.cleaning.iqr_multiplier = get<double>(c, "iqr_multiplier");
        }
    }
    if (doc.contains("folds")) {
        config.folds = get<std::size_t>(doc, "folds");
    }
    if (doc.contains("methods")) {
        config.methods = get<std::vector<std::string>>(doc, "methods");
    }
    if (doc.contains("measures")) {
        config.measures.clear();
        for (const auto& m : get<std::vector<std::string>>(doc, "measures")) {
            config.measures.push_back(measure_from(m));
        }
    }
    if (doc.contains("distance_norm")) {
        config.distance_norm = norm_from(get<std::string>(doc, "distance_norm"));
    }
    if (doc.contains("signed_rank")) {
        config.signed_rank = get<bool>(doc, "signed_rank");
    }
    if (doc.contains("compare")) {
        config.compare = get<std::string>(doc, "compare");
    }
    if (doc.contains("seed")) {
        config.megp.gp.seed = get<std::uint64_t>(doc, "seed");
    }
    if (doc.contains("target")) {
        config.target = get<std::string>(doc, "target");
    }
    if (doc.contains("features")) {
        config.features = resolve_features(get<std::vector<std::string>>(doc, "features"));
    }
    if (doc.contains("aux_columns")) {
        config.aux_columns = get<std::vector<std::string>>(doc, "aux_columns");
    }
    if (doc.contains("output_dir")) {
        config.output_dir = get<std::string>(doc, "output_dir");
    }
    if (doc.contains("mode")) {
        config.mode = get<std::string>(doc, "mode");
    }
    if (doc.contains("approach")) {
        config.approach = approach_from(get<std::string>(doc, "approach"));
    }
    if (doc.contains("measure")) {
        config.measure = measure_from(get<std::string>(doc, "measure"));
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app { "Multi-equation genetic programming for throughput regression", "megp" };
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::optional<std::string> out_dir;
    std::optional<std::string> profile_name;
    std::optional<std::string> target;
    std::optional<std::string> features;
    std::optional<std::string> aux;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Master random seed");
    app.add_option("--threads", threads, "Worker threads (never changes results)")->check(CLI::Range(1u, 1024u));
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--profile", profile_name, "paper (200/500/30) or fast (100/50/5)");
    app.add_option("--target", target, "Target column name");
    app.add_option("--features", features, "Comma-separated feature columns, or 'plant'");
    app.add_option("--aux", aux, "Comma-separated auxiliary columns to carry along");

    std::string input;
    std::string model_path;

    auto* clean_cmd = app.add_subcommand("clean", "Apply cleaning rules, write cleaned.csv and report.json");
    std::optional<std::string> nonneg, percent, outlier, freeze_from;
    std::optional<double> iqr;
    clean_cmd->add_option("input", input, "Input CSV")->required();
    clean_cmd->add_option("--nonnegative", nonneg, "Columns that must be >= 0");
    clean_cmd->add_option("--percent", percent, "Columns that must lie in [0, 100]");
    clean_cmd->add_option("--outlier", outlier, "Column screened with IQR fences");
    clean_cmd->add_option("--iqr", iqr, "IQR multiplier")->check(CLI::PositiveNumber);
    clean_cmd->add_option("--freeze-from", freeze_from, "Reuse outlier fences from an earlier report.json");

    auto* describe_cmd = app.add_subcommand("describe", "Write describe.csv with column statistics");
    describe_cmd->add_option("input", input, "Input CSV")->required();

    auto* synth_cmd = app.add_subcommand("synth", "Generate synth.csv from a regime spec");
    synth_cmd->add_option("spec", input, "Synthetic spec JSON")->required();

    auto* train_cmd = app.add_subcommand("train", "Fit a model and write model.json");
    std::optional<std::string> mode;
    train_cmd->add_option("input", input, "Training CSV")->required();
    train_cmd->add_option("--mode", mode, "megp or std");

    auto* predict_cmd = app.add_subcommand("predict", "Write predictions.csv for a model and test CSV");
    std::optional<std::string> approach, measure, norm;
    predict_cmd->add_option("model", model_path, "Model JSON")->required();
    predict_cmd->add_option("input", input, "Test CSV")->required();
    predict_cmd->add_option("--approach", approach, "GP-best-cl, GP-sim-avg, GP-w-avg(n), GP-w-avg(d), GP-w-avg(nd)");
    predict_cmd->add_option("--measure", measure, "euclidean, manhattan, chebyshev or cosine");
    predict_cmd->add_option("--distance-norm", norm, "max, minmax or sum");

    auto* experiment_cmd = app.add_subcommand("experiment", "Rolling-origin comparison; writes table3/table4/report");
    std::optional<std::size_t> folds;
    std::optional<std::string> methods, measures, compare;
    bool signed_rank = false;
    experiment_cmd->add_option("input", input, "Data CSV")->required();
    experiment_cmd->add_option("--folds", folds, "Number of rolling splits k");
    experiment_cmd->add_option("--methods", methods, "Comma-separated methods");
    experiment_cmd->add_option("--measures", measures, "Comma-separated distance measures");
    experiment_cmd->add_option("--compare", compare, "MEGP row for table4 (default: best mean)");
    experiment_cmd->add_option("--distance-norm", norm, "max, minmax or sum");
    experiment_cmd->add_flag("--signed-rank", signed_rank, "Also report paired signed-rank p-values");

    std::vector<std::string> argv_rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(argv_rest.begin(), argv_rest.end());
    try {
        app.parse(argv_rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        RunConfig config;
        std::string config_text;
        Profile profile = Profile::Paper;
        if (!config_path.empty()) {
            config_text = read_text(config_path);
            auto doc = json::parse(config_text, nullptr, false);
            if (!doc.is_discarded() && doc.is_object() && doc.contains("profile")) {
                profile = profile_from(get<std::string>(doc, "profile"));
            }
        }
        if (profile_name) {
            profile = profile_from(*profile_name);
        }
        apply_profile(profile, config);
        if (!config_text.empty()) {
            merge_config(config_text, config);
        }

        if (seed) {
            config.megp.gp.seed = *seed;
        }
        if (out_dir) {
            config.output_dir = *out_dir;
        }
        if (target) {
            config.target = *target;
        }
        if (features) {
            config.features = resolve_features(split_list(*features));
        }
        if (aux) {
            config.aux_columns = split_list(*aux);
        }
        if (nonneg) {
            config.cleaning.nonnegative_columns = split_list(*nonneg);
        }
        if (percent) {
            config.cleaning.percent_columns = split_list(*percent);
        }
        if (outlier) {
            config.cleaning.outlier_column = *outlier;
        }
        if (iqr) {
            config.cleaning.iqr_multiplier = *iqr;
        }
        if (mode) {
            config.mode = *mode;
        }
        if (approach) {
            config.approach = approach_from(*approach);
        }
        if (measure) {
            config.measure = measure_from(*measure);
        }
        if (norm) {
            config.distance_norm = norm_from(*norm);
        }
        if (folds) {
            config.folds = *folds;
        }
        if (methods) {
            config.methods = split_list(*methods);
        }
        if (measures) {
            config.measures.clear();
            for (const auto& m : split_list(*measures)) {
                config.measures.push_back(measure_from(m));
            }
        }
        if (compare) {
            config.compare = *compare;
        }
        if (signed_rank) {
            config.signed_rank = true;
        }
        config.megp.validate();

        if (*clean_cmd) {
            cmd_clean(config, input, freeze_from.value_or(""), out, err);
        } else if (*describe_cmd) {
            cmd_describe(config, input, out, err);
        } else if (*synth_cmd) {
            cmd_synth(config, input, out);
        } else if (*train_cmd) {
            cmd_train(config, input, threads, out, err);
        } else if (*predict_cmd) {
            cmd_predict(config, model_path, input, threads, out, err);
        } else if (*experiment_cmd) {
            cmd_experiment(config, input, threads, out, err);
        }
    } catch (const DegenerateData& e) {
        err << "error: degenerate dataset: " << e.what() << "\n";
        return kDegenerateData;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}

} // namespace megp::cli
