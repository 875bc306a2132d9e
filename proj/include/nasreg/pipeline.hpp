#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nasreg/dataset.hpp"
#include "nasreg/gp.hpp"
#include "nasreg/mlp.hpp"
#include "nasreg/serialize.hpp"
#include "nasreg/vae.hpp"

namespace nasreg {

// Candidate training could not produce a usable model (non-finite losses).
// The CLI maps it to exit code 3.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BoConfig {
    int budget = 30;
    SuggestStrategy strategy = SuggestStrategy::GpHedge;
    double beta = 1.96;
    std::size_t n_candidates = 1024;
};

struct PipelineConfig {
    double train_frac = 0.8;
    double val_frac = 0.1;
    VaeTrainConfig vae;
    std::size_t vae_multiplier = 20;
    int poly_order = 2;
    BoConfig bo;
    TrainConfig train;
    std::optional<ArchitectureSpec> fixed_architecture;  // set: skip the search stage
    std::uint64_t seed = 42;

    void validate() const;
};

PipelineConfig pipeline_config_from_json(const json& j);
json pipeline_config_to_json(const PipelineConfig& cfg);

struct BoTraceEntry {
    int iter = 0;
    ArchitectureSpec spec;
    std::vector<double> encoded;
    double objective = 0.0;           // validation RMSE of the candidate
    std::string acquisition_kind;     // "init", "EI", "PI" or "LCB"
    std::vector<double> hedge_probs;  // empty outside GP_HEDGE iterations
};

json bo_trace_entry_to_json(const BoTraceEntry& e);

struct SearchResult {
    ArchitectureSpec best;
    std::vector<BoTraceEntry> trace;
};

// Bayesian-optimization loop over the architecture space: min(8, budget)
// seeded uniform points, then acquisition-guided ones. Candidates train at a
// reduced budget (epochs/3, at least 50) and score by validation RMSE.
SearchResult search_stage(const Dataset& train, const Dataset& val, const PipelineConfig& cfg);

MlpModel initial_training_stage(const ArchitectureSpec& spec, const Dataset& train,
                                const Dataset& val, const PipelineConfig& cfg,
                                TrainHistory* history = nullptr);

// Same-shape second model over inputs [x, f1(x)]. Initialization copies the
// first model wherever shapes match and zeroes the weights of the appended
// prediction input, so the refined output starts exactly equal to f1. The
// first model is not modified.
MlpModel refinement_stage(const MlpModel& stage1, const Dataset& train, const Dataset& val,
                          const PipelineConfig& cfg, TrainHistory* history = nullptr);

Dataset append_prediction_column(const Dataset& d, const MlpModel& stage1);

struct PipelineArtifact {
    NormStats norm_stats;
    int poly_order = 2;
    ArchitectureSpec spec;
    MlpModel stage1;
    MlpModel stage2;
    std::string bo_trace_ref;  // sidecar filename, may be empty
};

struct StageTiming {
    std::string stage;
    double milliseconds = 0.0;
};

struct PipelineResult {
    PipelineArtifact artifact;
    MetricsReport test_metrics;
    std::vector<BoTraceEntry> bo_trace;
    std::vector<StageTiming> timings;
};

// split -> normalize (train stats) -> generative augmentation of the train
// split -> polynomial features -> search -> initial training -> refinement ->
// metrics on the real test rows in original target units.
PipelineResult run_pipeline(const Dataset& data, const PipelineConfig& cfg);

double predict_one(const PipelineArtifact& a, std::span<const double> x_raw);
std::vector<double> predict_many(const PipelineArtifact& a, const Matrix& x_raw);

json artifact_to_json(const PipelineArtifact& a);
PipelineArtifact artifact_from_json(const json& j);
void save_artifact(const PipelineArtifact& a, const std::filesystem::path& path);
PipelineArtifact load_artifact(const std::filesystem::path& path);

}  // namespace nasreg
