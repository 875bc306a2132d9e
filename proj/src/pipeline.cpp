#include "nasreg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

namespace nasreg {

void PipelineConfig::validate() const {
    if (poly_order < 1) throw std::invalid_argument("config: poly_order must be >= 1");
    if (bo.budget < 2) throw std::invalid_argument("config: bo.budget must be >= 2");
    if (bo.n_candidates < 1) throw std::invalid_argument("config: bo.n_candidates must be >= 1");
    if (train.epochs < 1) throw std::invalid_argument("config: train.epochs must be >= 1");
    if (vae.epochs < 1 || vae.batch_size < 1 || vae.learning_rate <= 0.0)
        throw std::invalid_argument("config: vae settings must be positive");
    if (!(train_frac > 0.0) || !(val_frac > 0.0) || !(train_frac + val_frac < 1.0))
        throw std::invalid_argument("config: split fractions must be positive with train+val < 1");
    if (fixed_architecture) fixed_architecture->validate();
}

namespace {

void require_known_keys(const json& j, std::initializer_list<const char*> known,
                        const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end())
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig cfg;
    try {
        require_known_keys(j, {"format_version", "seed", "split", "vae", "poly_order", "bo", "train",
                               "architecture"},
                           "top level");
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("split")) {
            const auto& s = j.at("split");
            require_known_keys(s, {"train_frac", "val_frac"}, "split");
            cfg.train_frac = s.value("train_frac", cfg.train_frac);
            cfg.val_frac = s.value("val_frac", cfg.val_frac);
        }
        if (j.contains("vae")) {
            const auto& v = j.at("vae");
            require_known_keys(v, {"multiplier", "epochs", "batch_size", "learning_rate"}, "vae");
            cfg.vae_multiplier = v.value("multiplier", cfg.vae_multiplier);
            cfg.vae.epochs = v.value("epochs", cfg.vae.epochs);
            cfg.vae.batch_size = v.value("batch_size", cfg.vae.batch_size);
            cfg.vae.learning_rate = v.value("learning_rate", cfg.vae.learning_rate);
        }
        cfg.poly_order = j.value("poly_order", cfg.poly_order);
        if (j.contains("bo")) {
            const auto& b = j.at("bo");
            require_known_keys(b, {"budget", "strategy", "beta", "n_candidates"}, "bo");
            cfg.bo.budget = b.value("budget", cfg.bo.budget);
            if (b.contains("strategy"))
                cfg.bo.strategy = strategy_from_string(b.at("strategy").get<std::string>());
            cfg.bo.beta = b.value("beta", cfg.bo.beta);
            cfg.bo.n_candidates = b.value("n_candidates", cfg.bo.n_candidates);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            require_known_keys(t, {"epochs", "early_best"}, "train");
            cfg.train.epochs = t.value("epochs", cfg.train.epochs);
            cfg.train.early_best = t.value("early_best", cfg.train.early_best);
        }
        if (j.contains("architecture") && !j.at("architecture").is_null())
            cfg.fixed_architecture = spec_from_json(j.at("architecture"));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json pipeline_config_to_json(const PipelineConfig& cfg) {
    json j{{"seed", cfg.seed},
           {"split", {{"train_frac", cfg.train_frac}, {"val_frac", cfg.val_frac}}},
           {"vae",
            {{"multiplier", cfg.vae_multiplier},
             {"epochs", cfg.vae.epochs},
             {"batch_size", cfg.vae.batch_size},
             {"learning_rate", cfg.vae.learning_rate}}},
           {"poly_order", cfg.poly_order},
           {"bo",
            {{"budget", cfg.bo.budget},
             {"strategy", to_string(cfg.bo.strategy)},
             {"beta", cfg.bo.beta},
             {"n_candidates", cfg.bo.n_candidates}}},
           {"train", {{"epochs", cfg.train.epochs}, {"early_best", cfg.train.early_best}}}};
    if (cfg.fixed_architecture)
        j["architecture"] = spec_to_json(*cfg.fixed_architecture);
    else
        j["architecture"] = nullptr;
    return j;
}

json bo_trace_entry_to_json(const BoTraceEntry& e) {
    return json{{"iter", e.iter},
                {"spec", spec_to_json(e.spec)},
                {"encoded_point", e.encoded},
                {"objective", e.objective},
                {"acquisition_kind", e.acquisition_kind},
                {"hedge_probs", e.hedge_probs}};
}

namespace {

double model_val_rmse(const MlpModel& m, const Dataset& val) {
    const auto preds = mlp_forward(m, val.features);
    double sq = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double e = preds[i] - val.targets[i];
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(preds.size()));
}

int reduced_search_epochs(int full_epochs) { return std::max(full_epochs / 3, 50); }

}  // namespace

SearchResult search_stage(const Dataset& train, const Dataset& val, const PipelineConfig& cfg) {
    if (val.n_rows() == 0) throw std::invalid_argument("search_stage: validation set is empty");
    const std::size_t width = train.n_features();

    Rng bo_rng(derive_seed(cfg.seed, "bo"));
    const std::uint64_t build_base = derive_seed(cfg.seed, "search-build");
    const std::uint64_t train_base = derive_seed(cfg.seed, "search-train");

    const int n_init = std::min(8, cfg.bo.budget);
    Matrix evaluated(0, 0);
    std::vector<double> scores;
    std::vector<std::array<double, kSpaceDims>> points;

    GpSurrogate surrogate;
    bool surrogate_ready = false;
    HedgeState hedge;
    SearchResult result;
    double best_score = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < cfg.bo.budget; ++iter) {
        BoTraceEntry entry;
        entry.iter = iter;

        std::array<double, kSpaceDims> encoded{};
        if (iter < n_init || !surrogate_ready) {
            for (auto& v : encoded) v = bo_rng.next_uniform();
            entry.acquisition_kind = "init";
        } else {
            const Suggestion sug =
                gp_suggest(surrogate, cfg.bo.strategy, hedge, bo_rng, cfg.bo.n_candidates, cfg.bo.beta);
            std::copy(sug.point.begin(), sug.point.end(), encoded.begin());
            entry.acquisition_kind = to_string(sug.kind);
            if (sug.from_hedge)
                entry.hedge_probs.assign(sug.hedge_probs.begin(), sug.hedge_probs.end());
        }

        const ArchitectureSpec spec = decode_point(encoded);
        const auto reencoded = encode_spec(spec);  // the point actually evaluated
        entry.spec = spec;
        entry.encoded.assign(reencoded.begin(), reencoded.end());

        Rng build_rng(build_base + static_cast<std::uint64_t>(iter));
        MlpModel candidate = build_mlp(spec, width, build_rng);
        TrainConfig tc = cfg.train;
        tc.epochs = reduced_search_epochs(cfg.train.epochs);
        tc.seed = train_base + static_cast<std::uint64_t>(iter);
        tc.early_best = true;
        train_mlp(candidate, train, val, tc);
        const double score = model_val_rmse(candidate, val);
        entry.objective = score;
        result.trace.push_back(entry);

        if (std::isfinite(score)) {
            points.push_back(reencoded);
            scores.push_back(score);
            if (score < best_score) {
                best_score = score;
                result.best = spec;
            }
            if (points.size() >= 2) {
                Matrix x(points.size(), kSpaceDims);
                for (std::size_t r = 0; r < points.size(); ++r)
                    std::copy(points[r].begin(), points[r].end(), x.row(r).begin());
                surrogate = gp_fit(x, scores);
                surrogate_ready = true;
                hedge_observe(hedge, surrogate);
            }
        }
    }
    if (!std::isfinite(best_score))
        throw DivergenceError("search_stage: all candidate trainings diverged");
    return result;
}

MlpModel initial_training_stage(const ArchitectureSpec& spec, const Dataset& train,
                                const Dataset& val, const PipelineConfig& cfg,
                                TrainHistory* history) {
    spec.validate();
    Rng build_rng(derive_seed(cfg.seed, "stage1-build"));
    MlpModel model = build_mlp(spec, train.n_features(), build_rng);
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, "stage1-train");
    const TrainHistory hist = train_mlp(model, train, val, tc);
    if (history) *history = hist;
    if (hist.diverged && hist.best_epoch == 0)
        throw DivergenceError("initial_training_stage: training diverged at epoch " +
                              std::to_string(hist.diverged_epoch));
    return model;
}

Dataset append_prediction_column(const Dataset& d, const MlpModel& stage1) {
    const auto preds = mlp_forward(stage1, d.features);
    Dataset out;
    out.feature_names = d.feature_names;
    out.feature_names.push_back("stage1_prediction");
    out.target_name = d.target_name;
    out.features = Matrix(d.n_rows(), d.n_features() + 1);
    out.targets = d.targets;
    out.synthetic_flags = d.synthetic_flags;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        std::copy_n(d.features.row(r).begin(), d.n_features(), out.features.row(r).begin());
        out.features(r, d.n_features()) = preds[r];
    }
    return out;
}

MlpModel refinement_stage(const MlpModel& stage1, const Dataset& train, const Dataset& val,
                          const PipelineConfig& cfg, TrainHistory* history) {
    if (stage1.layers.empty()) throw std::invalid_argument("refinement_stage: stage1 is untrained");

    MlpModel stage2;
    stage2.spec = stage1.spec;
    stage2.input_width = stage1.input_width + 1;
    stage2.layers = stage1.layers;
    // widen the first layer; the appended prediction input starts with zero
    // weights so the refined output initially reproduces stage1
    Matrix w1(stage1.input_width + 1, stage1.layers[0].w.cols(), 0.0);
    for (std::size_t r = 0; r < stage1.input_width; ++r)
        std::copy_n(stage1.layers[0].w.row(r).begin(), w1.cols(), w1.row(r).begin());
    stage2.layers[0].w = std::move(w1);

    const Dataset train2 = append_prediction_column(train, stage1);
    const Dataset val2 = append_prediction_column(val, stage1);

    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, "stage2-train");
    const TrainHistory hist = train_mlp(stage2, train2, val2, tc);
    if (history) *history = hist;
    if (hist.diverged && hist.best_epoch == 0)
        throw DivergenceError("refinement_stage: training diverged at epoch " +
                              std::to_string(hist.diverged_epoch));
    return stage2;
}

namespace {

struct StageClock {
    std::vector<StageTiming>& timings;

    template <typename F>
    auto run(const std::string& name, F&& f) -> decltype(f()) {
        const auto start = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(f())>) {
                f();
                record(name, start);
            } else {
                auto out = f();
                record(name, start);
                return out;
            }
        } catch (const DivergenceError&) {
            throw;
        } catch (const DataError& e) {
            throw DataError(name + ": " + e.what());
        } catch (const std::exception& e) {
            throw std::runtime_error(name + ": " + e.what());
        }
    }

    void record(const std::string& name, std::chrono::steady_clock::time_point start) {
        const auto end = std::chrono::steady_clock::now();
        timings.push_back({name, std::chrono::duration<double, std::milli>(end - start).count()});
    }
};

}  // namespace

PipelineResult run_pipeline(const Dataset& data, const PipelineConfig& cfg) {
    cfg.validate();
    if (data.n_rows() < 20) throw DataError("run_pipeline: need at least 20 rows");

    PipelineResult result;
    StageClock clock{result.timings};

    SplitResult parts = clock.run("split stage", [&] {
        Rng split_rng(derive_seed(cfg.seed, "split"));
        return split(data, cfg.train_frac, cfg.val_frac, split_rng);
    });
    const std::vector<double> test_targets_raw = parts.test.targets;

    NormStats stats;
    clock.run("normalization stage", [&] {
        stats = fit_normalizer(parts.train);
        parts.train = apply_normalizer(parts.train, stats);
        parts.val = apply_normalizer(parts.val, stats);
        parts.test = apply_normalizer(parts.test, stats);
    });

    if (cfg.vae_multiplier > 0) {
        clock.run("augmentation stage", [&] {
            VaeTrainConfig vc = cfg.vae;
            vc.seed = derive_seed(cfg.seed, "vae");
            const VaeTrainResult vae = vae_train(parts.train, vc);
            Rng gen_rng(derive_seed(cfg.seed, "vae-generate"));
            parts.train = augment_dataset(parts.train, vae.model, cfg.vae_multiplier, gen_rng);
        });
    }

    clock.run("feature augmentation stage", [&] {
        parts.train = poly_augment_dataset(parts.train, cfg.poly_order);
        parts.val = poly_augment_dataset(parts.val, cfg.poly_order);
        parts.test = poly_augment_dataset(parts.test, cfg.poly_order);
    });

    ArchitectureSpec spec;
    if (cfg.fixed_architecture) {
        spec = *cfg.fixed_architecture;
    } else {
        SearchResult search = clock.run("search stage", [&] {
            return search_stage(parts.train, parts.val, cfg);
        });
        spec = search.best;
        result.bo_trace = std::move(search.trace);
    }

    const MlpModel stage1 = clock.run("initial training stage", [&] {
        return initial_training_stage(spec, parts.train, parts.val, cfg);
    });
    const MlpModel stage2 = clock.run("refinement stage", [&] {
        return refinement_stage(stage1, parts.train, parts.val, cfg);
    });

    result.artifact.norm_stats = stats;
    result.artifact.poly_order = cfg.poly_order;
    result.artifact.spec = spec;
    result.artifact.stage1 = stage1;
    result.artifact.stage2 = stage2;

    clock.run("evaluation stage", [&] {
        const Dataset test2 = append_prediction_column(parts.test, stage1);
        const auto preds_scaled = mlp_forward(stage2, test2.features);
        std::vector<double> preds(preds_scaled.size());
        for (std::size_t i = 0; i < preds.size(); ++i)
            preds[i] = preds_scaled[i] * stats.target_std() + stats.target_mean();
        result.test_metrics = compute_metrics(test_targets_raw, preds);
    });
    return result;
}

double predict_one(const PipelineArtifact& a, std::span<const double> x_raw) {
    const std::size_t want = a.norm_stats.means.size() - 1;
    if (x_raw.size() != want)
        throw DataError("predict: expected " + std::to_string(want) + " features, got " +
                        std::to_string(x_raw.size()));
    std::vector<double> x(x_raw.size());
    for (std::size_t c = 0; c < x.size(); ++c) {
        const double sd = a.norm_stats.stds[c];
        x[c] = sd == 0.0 ? 0.0 : (x_raw[c] - a.norm_stats.means[c]) / sd;
    }
    std::vector<double> phi = poly_augment(x, a.poly_order);
    const double f1 = mlp_forward_one(a.stage1, phi);
    phi.push_back(f1);
    const double f2 = mlp_forward_one(a.stage2, phi);
    return f2 * a.norm_stats.target_std() + a.norm_stats.target_mean();
}

std::vector<double> predict_many(const PipelineArtifact& a, const Matrix& x_raw) {
    std::vector<double> out(x_raw.rows());
    for (std::size_t r = 0; r < x_raw.rows(); ++r) out[r] = predict_one(a, x_raw.row(r));
    return out;
}

json artifact_to_json(const PipelineArtifact& a) {
    return json{{"format_version", kFormatVersion},
                {"norm_stats", norm_stats_to_json(a.norm_stats)},
                {"poly_order", a.poly_order},
                {"spec", spec_to_json(a.spec)},
                {"stage1", mlp_to_json(a.stage1)},
                {"stage2", mlp_to_json(a.stage2)},
                {"bo_trace_ref", a.bo_trace_ref}};
}

PipelineArtifact artifact_from_json(const json& j) {
    check_format_version(j, "artifact");
    PipelineArtifact a;
    try {
        a.norm_stats = norm_stats_from_json(j.at("norm_stats"));
        a.poly_order = j.at("poly_order").get<int>();
        a.spec = spec_from_json(j.at("spec"));
        a.stage1 = mlp_from_json(j.at("stage1"));
        a.stage2 = mlp_from_json(j.at("stage2"));
        a.bo_trace_ref = j.value("bo_trace_ref", "");
    } catch (const json::exception& e) {
        throw SchemaError(std::string("artifact: ") + e.what());
    }
    if (a.stage2.input_width != a.stage1.input_width + 1)
        throw SchemaError("artifact: stage2 input width must be stage1 width + 1");
    return a;
}

void save_artifact(const PipelineArtifact& a, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("save_artifact: cannot write " + path.string());
    out << artifact_to_json(a).dump(2) << '\n';
}

PipelineArtifact load_artifact(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_artifact: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("artifact: invalid JSON: ") + e.what());
    }
    return artifact_from_json(j);
}

}  // namespace nasreg
