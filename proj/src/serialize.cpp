#include "nasreg/serialize.hpp"

namespace nasreg {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array()) throw SchemaError("matrix: expected an array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = rows == 0 ? 0 : j[0].size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw SchemaError("matrix: ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json layer_to_json(const DenseLayer& l) {
    return json{{"w", matrix_to_json(l.w)}, {"b", l.b}};
}

DenseLayer layer_from_json(const json& j) {
    if (!j.contains("w") || !j.contains("b")) throw SchemaError("layer: missing 'w' or 'b'");
    DenseLayer l;
    l.w = matrix_from_json(j.at("w"));
    l.b = j.at("b").get<std::vector<double>>();
    if (l.b.size() != l.w.cols()) throw SchemaError("layer: bias width does not match weights");
    return l;
}

json spec_to_json(const ArchitectureSpec& spec) {
    return json{{"hidden_layers", spec.hidden_layers},
                {"neurons_per_layer", spec.neurons_per_layer},
                {"activation", to_string(spec.activation)},
                {"batch_size", spec.batch_size},
                {"learning_rate", spec.learning_rate},
                {"loss", to_string(spec.loss)}};
}

ArchitectureSpec spec_from_json(const json& j) {
    ArchitectureSpec spec;
    try {
        spec.hidden_layers = j.at("hidden_layers").get<int>();
        spec.neurons_per_layer = j.at("neurons_per_layer").get<int>();
        spec.activation = activation_from_string(j.at("activation").get<std::string>());
        spec.batch_size = j.at("batch_size").get<int>();
        spec.learning_rate = j.at("learning_rate").get<double>();
        spec.loss = loss_from_string(j.at("loss").get<std::string>());
    } catch (const json::exception& e) {
        throw SchemaError(std::string("architecture spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

json mlp_to_json(const MlpModel& m) {
    json layers = json::array();
    for (const auto& l : m.layers) layers.push_back(layer_to_json(l));
    return json{{"kind", "mlp"},
                {"format_version", kFormatVersion},
                {"spec", spec_to_json(m.spec)},
                {"input_width", m.input_width},
                {"layers", std::move(layers)}};
}

void check_format_version(const json& j, const std::string& what) {
    if (!j.contains("format_version")) throw SchemaError(what + ": missing format_version");
    const int v = j.at("format_version").get<int>();
    if (v != kFormatVersion)
        throw SchemaError(what + ": unsupported format_version " + std::to_string(v) + " (expected " +
                          std::to_string(kFormatVersion) + ")");
}

MlpModel mlp_from_json(const json& j) {
    check_format_version(j, "mlp model");
    if (j.value("kind", "") != "mlp") throw SchemaError("mlp model: kind is not 'mlp'");
    MlpModel m;
    m.spec = spec_from_json(j.at("spec"));
    m.input_width = j.at("input_width").get<std::size_t>();
    for (const auto& lj : j.at("layers")) m.layers.push_back(layer_from_json(lj));
    if (m.layers.size() != static_cast<std::size_t>(m.spec.hidden_layers) + 1)
        throw SchemaError("mlp model: layer count does not match spec");
    return m;
}

json vae_to_json(const VaeModel& m) {
    json layers = json::array();
    for (const DenseLayer* l : {&m.enc_hidden, &m.enc_mu, &m.enc_logvar, &m.dec_hidden, &m.dec_out})
        layers.push_back(layer_to_json(*l));
    return json{{"kind", "vae"},
                {"format_version", kFormatVersion},
                {"input_width", m.input_width},
                {"layers", std::move(layers)}};
}

VaeModel vae_from_json(const json& j) {
    check_format_version(j, "vae model");
    if (j.value("kind", "") != "vae") throw SchemaError("vae model: kind is not 'vae'");
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != 5) throw SchemaError("vae model: expected 5 layers");
    VaeModel m;
    m.input_width = j.at("input_width").get<std::size_t>();
    m.enc_hidden = layer_from_json(layers[0]);
    m.enc_mu = layer_from_json(layers[1]);
    m.enc_logvar = layer_from_json(layers[2]);
    m.dec_hidden = layer_from_json(layers[3]);
    m.dec_out = layer_from_json(layers[4]);
    return m;
}

json norm_stats_to_json(const NormStats& s) {
    return json{{"means", s.means}, {"stds", s.stds}};
}

NormStats norm_stats_from_json(const json& j) {
    NormStats s;
    s.means = j.at("means").get<std::vector<double>>();
    s.stds = j.at("stds").get<std::vector<double>>();
    if (s.means.size() != s.stds.size()) throw SchemaError("norm stats: means/stds length mismatch");
    return s;
}

json metrics_to_json(const MetricsReport& m) {
    json j{{"rmse", m.rmse}, {"std", m.std_dev}, {"n", m.n}};
    if (m.mape)
        j["mape"] = *m.mape;
    else
        j["mape"] = nullptr;
    return j;
}

}  // namespace nasreg
