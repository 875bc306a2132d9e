#pragma once

#include <json.hpp>

#include "nasreg/dataset.hpp"
#include "nasreg/mlp.hpp"
#include "nasreg/vae.hpp"

namespace nasreg {

using json = nlohmann::json;

constexpr inline int kFormatVersion = 1;

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json layer_to_json(const DenseLayer& l);
DenseLayer layer_from_json(const json& j);

json spec_to_json(const ArchitectureSpec& spec);
ArchitectureSpec spec_from_json(const json& j);

json mlp_to_json(const MlpModel& m);
MlpModel mlp_from_json(const json& j);

json vae_to_json(const VaeModel& m);
VaeModel vae_from_json(const json& j);

json norm_stats_to_json(const NormStats& s);
NormStats norm_stats_from_json(const json& j);

json metrics_to_json(const MetricsReport& m);

// Serialized-format violations (bad schema, wrong version).
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_format_version(const json& j, const std::string& what);

}  // namespace nasreg
