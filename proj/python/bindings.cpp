#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nasreg/baselines.hpp"
#include "nasreg/pipeline.hpp"

namespace py = pybind11;
using namespace nasreg;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows[0].size();
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != c) throw std::invalid_argument("ragged rows");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
    std::vector<std::vector<double>> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
    return out;
}

Dataset dataset_from_rows(const std::vector<std::vector<double>>& features,
                          const std::vector<double>& targets,
                          const std::vector<std::string>& feature_names) {
    Dataset d;
    d.features = matrix_from_rows(features);
    d.targets = targets;
    d.synthetic_flags.assign(targets.size(), false);
    if (!feature_names.empty()) {
        d.feature_names = feature_names;
    } else {
        for (std::size_t c = 0; c < d.features.cols(); ++c)
            d.feature_names.push_back("x" + std::to_string(c + 1));
    }
    if (d.features.rows() != d.targets.size())
        throw std::invalid_argument("features/targets row mismatch");
    if (d.feature_names.size() != d.features.cols())
        throw std::invalid_argument("feature_names length mismatch");
    return d;
}

py::dict metrics_dict(const MetricsReport& m) {
    py::dict out;
    out["mape"] = m.mape ? py::object(py::float_(*m.mape)) : py::object(py::none());
    out["rmse"] = m.rmse;
    out["std"] = m.std_dev;
    out["n"] = m.n;
    return out;
}

}  // namespace

PYBIND11_MODULE(_nasreg, m) {
    m.doc() = "Generative-augmented architecture search and two-stage regression";

    py::register_exception<DataError>(m, "DataError");
    py::register_exception<SchemaError>(m, "SchemaError");
    py::register_exception<DivergenceError>(m, "DivergenceError");

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&dataset_from_rows), py::arg("features"), py::arg("targets"),
             py::arg("feature_names") = std::vector<std::string>{})
        .def_property_readonly("n_rows", &Dataset::n_rows)
        .def_property_readonly("n_features", &Dataset::n_features)
        .def_readonly("feature_names", &Dataset::feature_names)
        .def_readonly("target_name", &Dataset::target_name)
        .def_readonly("targets", &Dataset::targets)
        .def_readonly("synthetic_flags", &Dataset::synthetic_flags)
        .def_property_readonly("features",
                               [](const Dataset& d) { return matrix_to_rows(d.features); });

    m.def("load_csv", &load_csv, py::arg("path"), py::arg("target_column") = std::nullopt);

    py::class_<ArchitectureSpec>(m, "ArchitectureSpec")
        .def(py::init([](int hidden_layers, int neurons_per_layer, const std::string& activation,
                         int batch_size, double learning_rate, const std::string& loss) {
                 ArchitectureSpec spec{hidden_layers, neurons_per_layer,
                                       activation_from_string(activation), batch_size,
                                       learning_rate, loss_from_string(loss)};
                 spec.validate();
                 return spec;
             }),
             py::arg("hidden_layers"), py::arg("neurons_per_layer"), py::arg("activation"),
             py::arg("batch_size"), py::arg("learning_rate"), py::arg("loss"))
        .def_readonly("hidden_layers", &ArchitectureSpec::hidden_layers)
        .def_readonly("neurons_per_layer", &ArchitectureSpec::neurons_per_layer)
        .def_readonly("batch_size", &ArchitectureSpec::batch_size)
        .def_readonly("learning_rate", &ArchitectureSpec::learning_rate)
        .def_property_readonly("activation",
                               [](const ArchitectureSpec& s) { return to_string(s.activation); })
        .def_property_readonly("loss", [](const ArchitectureSpec& s) { return to_string(s.loss); })
        .def("__repr__", [](const ArchitectureSpec& s) { return spec_to_json(s).dump(); });

    m.def("encode_spec", [](const ArchitectureSpec& s) {
        const auto p = encode_spec(s);
        return std::vector<double>(p.begin(), p.end());
    });
    m.def("decode_point", [](const std::vector<double>& p) { return decode_point(std::span(p)); });

    m.def(
        "poly_augment",
        [](const std::vector<double>& x, int order) { return poly_augment(x, order); },
        py::arg("x"), py::arg("order"));

    m.def(
        "compute_metrics",
        [](const std::vector<double>& y, const std::vector<double>& yhat) {
            return metrics_dict(compute_metrics(y, yhat));
        },
        py::arg("y"), py::arg("yhat"));

    py::class_<PipelineArtifact>(m, "PipelineArtifact")
        .def_property_readonly("spec", [](const PipelineArtifact& a) { return a.spec; })
        .def_property_readonly("poly_order",
                               [](const PipelineArtifact& a) { return a.poly_order; })
        .def("predict",
             [](const PipelineArtifact& a, const std::vector<double>& x) {
                 return predict_one(a, x);
             })
        .def("predict_batch",
             [](const PipelineArtifact& a, const std::vector<std::vector<double>>& rows) {
                 return predict_many(a, matrix_from_rows(rows));
             })
        .def("to_json", [](const PipelineArtifact& a) { return artifact_to_json(a).dump(2); });

    m.def("save_artifact", &save_artifact, py::arg("artifact"), py::arg("path"));
    m.def("load_artifact", &load_artifact, py::arg("path"));

    m.def(
        "run_pipeline",
        [](const Dataset& data, const std::string& config_json) {
            const PipelineConfig cfg = pipeline_config_from_json(json::parse(config_json));
            PipelineResult result;
            {
                py::gil_scoped_release release;
                result = run_pipeline(data, cfg);
            }
            py::dict out;
            out["metrics"] = metrics_dict(result.test_metrics);
            out["artifact"] = result.artifact;
            std::vector<std::string> trace;
            for (const auto& e : result.bo_trace)
                trace.push_back(bo_trace_entry_to_json(e).dump());
            out["bo_trace"] = trace;
            return out;
        },
        py::arg("data"), py::arg("config_json") = "{}");

    m.def(
        "fit_linear",
        [](const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           const std::string& penalty, double lambda, double alpha) {
            Penalty pen;
            if (penalty == "none")
                pen = {PenaltyKind::None, 0.0, 0.0};
            else if (penalty == "ridge")
                pen = {PenaltyKind::Ridge, lambda, 0.0};
            else if (penalty == "lasso")
                pen = {PenaltyKind::Lasso, lambda, 1.0};
            else if (penalty == "elastic")
                pen = {PenaltyKind::ElasticNet, lambda, alpha};
            else
                throw std::invalid_argument("penalty must be none|ridge|lasso|elastic");
            return fit_linear(matrix_from_rows(x), y, pen).weights;
        },
        py::arg("x"), py::arg("y"), py::arg("penalty") = "none", py::arg("lambda") = 0.1,
        py::arg("alpha") = 0.5);

    m.def(
        "knn_predict",
        [](const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           const std::vector<double>& query, std::size_t k) {
            return knn_predict(matrix_from_rows(x), y, query, k);
        },
        py::arg("x"), py::arg("y"), py::arg("query"), py::arg("k"));

    m.def(
        "gpr_fit_predict",
        [](const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           const std::vector<std::vector<double>>& test) {
            const GprPrediction p = gpr_fit_predict(matrix_from_rows(x), y, matrix_from_rows(test));
            return py::make_tuple(p.mean, p.variance);
        },
        py::arg("x"), py::arg("y"), py::arg("test"));

    m.attr("__version__") = "0.1.0";
}
