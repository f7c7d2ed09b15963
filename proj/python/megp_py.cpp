#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "megp/cluster.hpp"
#include "megp/error.hpp"
#include "megp/evaluation.hpp"
#include "megp/gp_engine.hpp"
#include "megp/model_io.hpp"
#include "megp/predictor.hpp"

namespace py = pybind11;
using namespace megp;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Vector = py::array_t<double, py::array::c_style | py::array::forcecast>;

Dataset to_dataset(const Matrix& x, const Vector& y, const std::vector<std::string>& names)
{
    if (x.ndim() != 2) {
        throw InputError("X must be a 2-D array");
    }
    const auto rows = static_cast<std::size_t>(x.shape(0));
    const auto cols = static_cast<std::size_t>(x.shape(1));
    if (y.ndim() != 1 || static_cast<std::size_t>(y.shape(0)) != rows) {
        throw InputError("y must be 1-D with one entry per row of X");
    }
    Dataset d;
    if (names.empty()) {
        for (std::size_t j = 0; j < cols; ++j) {
            d.feature_names.push_back("x" + std::to_string(j));
        }
    } else if (names.size() == cols) {
        d.feature_names = names;
    } else {
        throw InputError("feature_names length does not match X");
    }
    d.target_name = "y";
    d.features.assign(x.data(), x.data() + rows * cols);
    d.target.assign(y.data(), y.data() + rows);
    return d;
}

MegpConfig megp_config(const std::string& json_text)
{
    MegpConfig cfg;
    if (!json_text.empty()) {
        auto doc = nlohmann::json::parse(json_text, nullptr, false);
        if (doc.is_discarded()) {
            throw InputError("config is not valid JSON");
        }
        merge_json(doc, cfg);
    }
    cfg.validate();
    return cfg;
}

DistanceMeasure measure_of(const std::string& s)
{
    if (auto m = parse_distance_measure(s)) {
        return *m;
    }
    throw InputError("unknown distance measure '" + s + "'");
}

PredictionApproach approach_of(const std::string& s)
{
    if (auto a = parse_approach(s)) {
        return *a;
    }
    throw InputError("unknown prediction approach '" + s + "'");
}

DistanceNormalization norm_of(const std::string& s)
{
    if (auto n = parse_normalization(s)) {
        return *n;
    }
    throw InputError("unknown distance normalization '" + s + "'");
}

py::dict fit_dict(const FitResult& r)
{
    py::dict d;
    d["expression"] = serialize(r.expression);
    d["train_mae"] = r.train_mae;
    d["train_rmse"] = r.train_rmse;
    d["generations_run"] = r.generations_run;
    d["seed"] = r.seed;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Multi-equation genetic programming core";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);

    m.def("parse", [](const std::string& text) { return serialize(parse(text)); },
        "Parse and re-serialize an s-expression (canonical form).");
    m.def(
        "evaluate",
        [](const std::string& expr, const Matrix& x) {
            const auto e = parse(expr);
            if (x.ndim() != 2) {
                throw InputError("X must be a 2-D array");
            }
            const auto rows = static_cast<std::size_t>(x.shape(0));
            const auto cols = static_cast<std::size_t>(x.shape(1));
            Vector out(static_cast<py::ssize_t>(rows));
            auto* o = out.mutable_data();
            for (std::size_t i = 0; i < rows; ++i) {
                o[i] = evaluate(e, { x.data() + i * cols, cols });
            }
            return out;
        },
        py::arg("expression"), py::arg("X"));

    m.def(
        "fit",
        [](const Matrix& x, const Vector& y, const std::string& gp_json, std::size_t runs, unsigned threads) {
            GpConfig gp;
            if (!gp_json.empty()) {
                auto doc = nlohmann::json::parse(gp_json, nullptr, false);
                if (doc.is_discarded()) {
                    throw InputError("config is not valid JSON");
                }
                merge_json(doc, gp);
            }
            gp.validate();
            const auto data = to_dataset(x, y, {});
            std::optional<FitResult> r;
            {
                py::gil_scoped_release release;
                r = runs == 0 ? fit(data, gp, threads) : best_of_runs(data, runs, gp, threads);
            }
            return fit_dict(*r);
        },
        py::arg("X"), py::arg("y"), py::arg("config_json") = "", py::arg("runs") = 0, py::arg("threads") = 1,
        "runs = 0 performs one fit with the config seed; runs >= 1 uses best_of_runs.");

    py::class_<MegpModel>(m, "Model")
        .def_static(
            "train",
            [](const Matrix& x, const Vector& y, const std::string& config_json,
                const std::vector<std::string>& feature_names, unsigned threads) {
                const auto cfg = megp_config(config_json);
                const auto data = to_dataset(x, y, feature_names);
                py::gil_scoped_release release;
                return cluster(data, cfg, threads);
            },
            py::arg("X"), py::arg("y"), py::arg("config_json") = "", py::arg("feature_names") = std::vector<std::string> {},
            py::arg("threads") = 1)
        .def_static("from_json",
            [](const std::string& text) {
                auto doc = nlohmann::json::parse(text, nullptr, false);
                if (doc.is_discarded()) {
                    throw InputError("model is not valid JSON");
                }
                return model_from_json(doc);
            })
        .def("to_json", [](const MegpModel& model) { return dump_model(model); })
        .def_property_readonly("n_clusters", [](const MegpModel& model) { return model.clusters.size(); })
        .def_property_readonly("leftover_count", [](const MegpModel& model) { return model.leftover_count; })
        .def_property_readonly("feature_names", [](const MegpModel& model) { return model.feature_names; })
        .def_property_readonly("epsilons",
            [](const MegpModel& model) {
                std::vector<double> out;
                for (const auto& c : model.clusters) {
                    out.push_back(c.epsilon);
                }
                return out;
            })
        .def_property_readonly("cluster_sizes",
            [](const MegpModel& model) {
                std::vector<std::size_t> out;
                for (const auto& c : model.clusters) {
                    out.push_back(c.member_count);
                }
                return out;
            })
        .def_property_readonly("equations",
            [](const MegpModel& model) {
                std::vector<std::string> out;
                for (const auto& c : model.clusters) {
                    out.push_back(serialize(c.equation));
                }
                return out;
            })
        .def(
            "predict",
            [](const MegpModel& model, const Matrix& x, const std::string& approach, const std::string& measure,
                const std::string& norm, unsigned threads) {
                const auto rows = x.ndim() == 2 ? static_cast<std::size_t>(x.shape(0)) : 0;
                Vector zeros(static_cast<py::ssize_t>(rows));
                std::fill(zeros.mutable_data(), zeros.mutable_data() + rows, 0.0);
                const auto data = to_dataset(x, zeros, model.feature_names);
                std::vector<PredictionBreakdown> out;
                {
                    py::gil_scoped_release release;
                    out = predict_batch(model, data, approach_of(approach), measure_of(measure), norm_of(norm), threads);
                }
                Vector result(static_cast<py::ssize_t>(out.size()));
                for (std::size_t i = 0; i < out.size(); ++i) {
                    result.mutable_data()[i] = out[i].prediction;
                }
                return result;
            },
            py::arg("X"), py::arg("approach") = "GP-w-avg(nd)", py::arg("measure") = "euclidean",
            py::arg("distance_norm") = "max", py::arg("threads") = 1);

    m.def(
        "distance",
        [](const std::vector<double>& p, const std::vector<double>& q, const std::string& measure) {
            return distance(p, q, measure_of(measure));
        },
        py::arg("p"), py::arg("q"), py::arg("measure") = "euclidean");
    m.def("improvement_percent", &improvement_percent, py::arg("mae_std"), py::arg("mae_best"));
    m.def(
        "wilcoxon_rank_sum",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            auto r = wilcoxon_rank_sum(a, b);
            return py::make_tuple(r.statistic, r.p_value, r.exact);
        },
        py::arg("a"), py::arg("b"), "Returns (U, two-sided p, exact).");
    m.def(
        "rolling_splits",
        [](std::size_t n, std::size_t k) {
            std::vector<py::tuple> out;
            for (const auto& s : rolling_splits(n, k)) {
                out.push_back(py::make_tuple(s.train_begin, s.train_end, s.test_begin, s.test_end));
            }
            return out;
        },
        py::arg("n"), py::arg("k"), "List of (train_begin, train_end, test_begin, test_end).");

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "megp");
            std::ostringstream out;
            std::ostringstream err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a command-line invocation; returns (exit code, stdout, stderr).");
}
