#include "nasreg/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nasreg/baselines.hpp"

namespace nasreg::cli {

namespace fs = std::filesystem;

CliConfig cli_config_from_json(const json& j) {
    CliConfig cfg;
    json pipeline_part = j;
    if (j.contains("baseline")) {
        const auto& b = j.at("baseline");
        for (const auto& [key, value] : b.items()) {
            if (key == "lambda")
                cfg.baseline.lambda = value.get<double>();
            else if (key == "alpha")
                cfg.baseline.alpha = value.get<double>();
            else if (key == "k")
                cfg.baseline.k = value.get<int>();
            else
                throw std::invalid_argument("config: unknown key '" + key + "' in baseline");
        }
        pipeline_part.erase("baseline");
    }
    cfg.pipeline = pipeline_config_from_json(pipeline_part);
    if (cfg.baseline.lambda < 0.0 || cfg.baseline.alpha < 0.0 || cfg.baseline.alpha > 1.0 ||
        cfg.baseline.k < 1)
        throw std::invalid_argument("config: invalid baseline settings");
    return cfg;
}

CliConfig load_cli_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    return cli_config_from_json(j);
}

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for digest: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write " + tmp.string());
        out << content;
        if (!out.good()) throw DataError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

struct Timings {
    std::vector<StageTiming> stages;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    json to_json() const {
        json t = json::object();
        for (const auto& s : stages) t[s.stage] = s.milliseconds;
        t["total"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                         .count();
        return t;
    }
};

json manifest_json(const std::string& command, const CliConfig& cfg, const fs::path& config_path,
                   const fs::path& data_path, const Timings& timings,
                   const std::vector<std::string>& outputs, const json& extra = json::object()) {
    json inputs = json::object();
    if (!config_path.empty())
        inputs["config"] = {{"path", config_path.string()}, {"fnv1a64", file_digest(config_path)}};
    if (!data_path.empty())
        inputs["data"] = {{"path", data_path.string()}, {"fnv1a64", file_digest(data_path)}};
    json m{{"format_version", kFormatVersion},
           {"tool_version", kToolVersion},
           {"command", command},
           {"seed", cfg.pipeline.seed},
           {"config", pipeline_config_to_json(cfg.pipeline)},
           {"baseline",
            {{"lambda", cfg.baseline.lambda}, {"alpha", cfg.baseline.alpha}, {"k", cfg.baseline.k}}},
           {"inputs", inputs},
           {"timings_ms", timings.to_json()},
           {"outputs", outputs}};
    for (const auto& [k, v] : extra.items()) m[k] = v;
    return m;
}

std::string trace_to_jsonl(const std::vector<BoTraceEntry>& trace) {
    std::string out;
    for (const auto& e : trace) out += bo_trace_entry_to_json(e).dump() + "\n";
    return out;
}

struct CommonArgs {
    std::string config_path;
    std::string data_path;
    std::string out_dir;
    std::string target_column;
    std::int64_t seed_override = -1;
};

CliConfig load_config_with_overrides(const CommonArgs& args) {
    CliConfig cfg = args.config_path.empty() ? CliConfig{} : load_cli_config(args.config_path);
    if (args.seed_override >= 0) cfg.pipeline.seed = static_cast<std::uint64_t>(args.seed_override);
    return cfg;
}

Dataset load_data(const CommonArgs& args) {
    return load_csv(args.data_path, args.target_column.empty()
                                        ? std::nullopt
                                        : std::optional<std::string>(args.target_column));
}

void ensure_out_dir(const std::string& out_dir) {
    if (out_dir.empty()) throw std::invalid_argument("--out directory is required");
    fs::create_directories(out_dir);
}

// Features-only CSV: header plus numeric rows, no target column.
Matrix load_features_csv(const fs::path& path, std::vector<std::string>* names = nullptr) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (names) *names = header;
    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            const auto begin = cell.find_first_not_of(" \t\r");
            const auto end = cell.find_last_not_of(" \t\r");
            const std::string trimmed =
                begin == std::string::npos ? "" : cell.substr(begin, end - begin + 1);
            double value = 0.0;
            const auto [ptr, ec] =
                std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
            if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size() || !std::isfinite(value))
                throw DataError("non-numeric cell '" + trimmed + "' at row " + std::to_string(row_no));
            row.push_back(value);
        }
        if (row.size() != header.size())
            throw DataError("row " + std::to_string(row_no) + " has wrong cell count");
        rows.push_back(std::move(row));
    }
    Matrix x(rows.size(), header.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), x.row(r).begin());
    return x;
}

// --- subcommands ------------------------------------------------------------

int cmd_run(const CommonArgs& args) {
    Timings timings;
    const CliConfig cfg = load_config_with_overrides(args);
    const Dataset data = load_data(args);
    ensure_out_dir(args.out_dir);

    PipelineResult result = run_pipeline(data, cfg.pipeline);
    timings.stages = result.timings;
    result.artifact.bo_trace_ref = "bo_trace.jsonl";

    const fs::path out(args.out_dir);
    write_text_atomic(out / "artifact.json", artifact_to_json(result.artifact).dump(2) + "\n");
    write_text_atomic(out / "metrics.json", metrics_to_json(result.test_metrics).dump(2) + "\n");
    write_text_atomic(out / "bo_trace.jsonl", trace_to_jsonl(result.bo_trace));
    const auto manifest =
        manifest_json("run", cfg, args.config_path, args.data_path, timings,
                      {"artifact.json", "metrics.json", "bo_trace.jsonl", "manifest.json"});
    write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& parameter,
              const std::vector<std::string>& values) {
    Timings timings;
    const CliConfig base = load_config_with_overrides(args);
    if (parameter != "poly_order" && parameter != "acquisition")
        throw std::invalid_argument("sweep: unknown parameter '" + parameter + "'");
    if (values.empty()) throw std::invalid_argument("sweep: --values is required");

    // validate every value before any expensive work
    std::vector<CliConfig> configs;
    for (const auto& v : values) {
        CliConfig cfg = base;
        if (parameter == "poly_order") {
            try {
                cfg.pipeline.poly_order = std::stoi(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("sweep: invalid poly_order '" + v + "'");
            }
        } else {
            cfg.pipeline.bo.strategy = strategy_from_string(v);
        }
        cfg.pipeline.validate();
        configs.push_back(std::move(cfg));
    }

    const Dataset data = load_data(args);
    ensure_out_dir(args.out_dir);

    std::ostringstream csv;
    csv << "value,mape,rmse,std\n";
    csv.precision(12);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const PipelineResult r = run_pipeline(data, configs[i].pipeline);
        csv << values[i] << ',';
        if (r.test_metrics.mape)
            csv << *r.test_metrics.mape;
        else
            csv << "nan";
        csv << ',' << r.test_metrics.rmse << ',' << r.test_metrics.std_dev << '\n';
    }
    const fs::path out(args.out_dir);
    write_text_atomic(out / "sweep.csv", csv.str());
    const auto manifest = manifest_json("sweep", base, args.config_path, args.data_path, timings,
                                        {"sweep.csv", "manifest.json"},
                                        json{{"parameter", parameter}, {"values", values}});
    write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

int cmd_augment(const CommonArgs& args) {
    Timings timings;
    const CliConfig cfg = load_config_with_overrides(args);
    const Dataset data = load_data(args);
    ensure_out_dir(args.out_dir);

    const NormStats stats = fit_normalizer(data);
    const Dataset normalized = apply_normalizer(data, stats);
    VaeTrainConfig vc = cfg.pipeline.vae;
    vc.seed = derive_seed(cfg.pipeline.seed, "vae");
    const VaeTrainResult vae = vae_train(normalized, vc);
    Rng gen_rng(derive_seed(cfg.pipeline.seed, "vae-generate"));
    const Dataset augmented =
        augment_dataset(normalized, vae.model, cfg.pipeline.vae_multiplier, gen_rng);
    const Dataset restored = apply_normalizer(augmented, stats, /*invert=*/true);

    const fs::path out(args.out_dir);
    const fs::path csv_path = out / "augmented.csv";
    write_csv(restored, csv_path.string() + ".tmp", /*synthetic_column=*/true);
    fs::rename(csv_path.string() + ".tmp", csv_path);
    write_text_atomic(out / "vae.json", vae_to_json(vae.model).dump(2) + "\n");
    const auto manifest = manifest_json("augment", cfg, args.config_path, args.data_path, timings,
                                        {"augmented.csv", "vae.json", "manifest.json"});
    write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

// Shared preprocessing for search/train: split, normalize, augment, expand.
struct PreparedData {
    SplitResult parts;
    NormStats stats;
    std::vector<double> test_targets_raw;
};

PreparedData prepare(const Dataset& data, const PipelineConfig& cfg) {
    PreparedData p;
    Rng split_rng(derive_seed(cfg.seed, "split"));
    p.parts = split(data, cfg.train_frac, cfg.val_frac, split_rng);
    p.test_targets_raw = p.parts.test.targets;
    p.stats = fit_normalizer(p.parts.train);
    p.parts.train = apply_normalizer(p.parts.train, p.stats);
    p.parts.val = apply_normalizer(p.parts.val, p.stats);
    p.parts.test = apply_normalizer(p.parts.test, p.stats);
    if (cfg.vae_multiplier > 0) {
        VaeTrainConfig vc = cfg.vae;
        vc.seed = derive_seed(cfg.seed, "vae");
        const VaeTrainResult vae = vae_train(p.parts.train, vc);
        Rng gen_rng(derive_seed(cfg.seed, "vae-generate"));
        p.parts.train = augment_dataset(p.parts.train, vae.model, cfg.vae_multiplier, gen_rng);
    }
    p.parts.train = poly_augment_dataset(p.parts.train, cfg.poly_order);
    p.parts.val = poly_augment_dataset(p.parts.val, cfg.poly_order);
    p.parts.test = poly_augment_dataset(p.parts.test, cfg.poly_order);
    return p;
}

int cmd_search(const CommonArgs& args) {
    Timings timings;
    const CliConfig cfg = load_config_with_overrides(args);
    const Dataset data = load_data(args);
    ensure_out_dir(args.out_dir);

    const PreparedData p = prepare(data, cfg.pipeline);
    const SearchResult result = search_stage(p.parts.train, p.parts.val, cfg.pipeline);

    const fs::path out(args.out_dir);
    const json best{{"format_version", kFormatVersion}, {"spec", spec_to_json(result.best)}};
    write_text_atomic(out / "best_spec.json", best.dump(2) + "\n");
    write_text_atomic(out / "bo_trace.jsonl", trace_to_jsonl(result.trace));
    const auto manifest = manifest_json("search", cfg, args.config_path, args.data_path, timings,
                                        {"best_spec.json", "bo_trace.jsonl", "manifest.json"});
    write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

int cmd_train(const CommonArgs& args) {
    Timings timings;
    const CliConfig cfg = load_config_with_overrides(args);
    if (!cfg.pipeline.fixed_architecture)
        throw std::invalid_argument("train: config must contain an \"architecture\" object");
    const Dataset data = load_data(args);
    ensure_out_dir(args.out_dir);

    PipelineResult result = run_pipeline(data, cfg.pipeline);
    timings.stages = result.timings;

    const fs::path out(args.out_dir);
    write_text_atomic(out / "artifact.json", artifact_to_json(result.artifact).dump(2) + "\n");
    write_text_atomic(out / "metrics.json", metrics_to_json(result.test_metrics).dump(2) + "\n");
    const auto manifest = manifest_json("train", cfg, args.config_path, args.data_path, timings,
                                        {"artifact.json", "metrics.json", "manifest.json"});
    write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

int cmd_predict(const CommonArgs& args, const std::string& artifact_path) {
    Timings timings;
    if (artifact_path.empty()) throw std::invalid_argument("predict: --artifact is required");
    const PipelineArtifact artifact = load_artifact(artifact_path);
    const Matrix x = load_features_csv(args.data_path);
    ensure_out_dir(args.out_dir);

    const std::vector<double> preds = predict_many(artifact, x);
    std::ostringstream csv;
    csv.precision(17);
    csv << "prediction\n";
    for (double v : preds) csv << v << '\n';

    const fs::path out(args.out_dir);
    write_text_atomic(out / "predictions.csv", csv.str());
    CliConfig cfg;  // predict carries no pipeline config
    json extra{{"artifact", {{"path", artifact_path}, {"fnv1a64", file_digest(artifact_path)}}}};
    const auto manifest = manifest_json("predict", cfg, "", args.data_path, timings,
                                        {"predictions.csv", "manifest.json"}, extra);
    write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

int cmd_evaluate(const CommonArgs& args, const std::string& pred_path) {
    Timings timings;
    if (pred_path.empty()) throw std::invalid_argument("evaluate: --pred is required");
    const Dataset data = load_data(args);
    std::vector<std::string> names;
    const Matrix pred_mat = load_features_csv(pred_path, &names);
    if (pred_mat.cols() != 1) throw DataError("evaluate: predictions CSV must have one column");
    if (pred_mat.rows() != data.n_rows())
        throw DataError("evaluate: " + std::to_string(pred_mat.rows()) + " predictions for " +
                        std::to_string(data.n_rows()) + " rows");
    ensure_out_dir(args.out_dir);

    std::vector<double> preds(pred_mat.rows());
    for (std::size_t r = 0; r < pred_mat.rows(); ++r) preds[r] = pred_mat(r, 0);
    const MetricsReport metrics = compute_metrics(data.targets, preds);

    const fs::path out(args.out_dir);
    write_text_atomic(out / "metrics.json", metrics_to_json(metrics).dump(2) + "\n");
    CliConfig cfg;
    json extra{{"predictions", {{"path", pred_path}, {"fnv1a64", file_digest(pred_path)}}}};
    const auto manifest = manifest_json("evaluate", cfg, "", args.data_path, timings,
                                        {"metrics.json", "manifest.json"}, extra);
    write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

int cmd_baseline(const CommonArgs& args, const std::string& algo) {
    Timings timings;
    const CliConfig cfg = load_config_with_overrides(args);
    const Dataset data = load_data(args);
    ensure_out_dir(args.out_dir);

    Rng split_rng(derive_seed(cfg.pipeline.seed, "split"));
    SplitResult parts = split(data, cfg.pipeline.train_frac, cfg.pipeline.val_frac, split_rng);
    const std::vector<double> test_targets_raw = parts.test.targets;
    const NormStats stats = fit_normalizer(parts.train);
    const Dataset train = apply_normalizer(parts.train, stats);
    const Dataset test = apply_normalizer(parts.test, stats);

    std::vector<double> preds_scaled;
    if (algo == "lr" || algo == "ridge" || algo == "lasso" || algo == "enr") {
        Penalty penalty;
        if (algo == "ridge") penalty = {PenaltyKind::Ridge, cfg.baseline.lambda, 0.0};
        if (algo == "lasso") penalty = {PenaltyKind::Lasso, cfg.baseline.lambda, 1.0};
        if (algo == "enr") penalty = {PenaltyKind::ElasticNet, cfg.baseline.lambda, cfg.baseline.alpha};
        const LinearModel model = fit_linear(train.features, train.targets, penalty);
        preds_scaled = linear_predict(model, test.features);
    } else if (algo == "knn") {
        const auto k = static_cast<std::size_t>(
            std::min<std::size_t>(static_cast<std::size_t>(cfg.baseline.k), train.n_rows()));
        preds_scaled.resize(test.n_rows());
        for (std::size_t r = 0; r < test.n_rows(); ++r)
            preds_scaled[r] = knn_predict(train.features, train.targets, test.features.row(r), k);
    } else if (algo == "gpr") {
        preds_scaled = gpr_fit_predict(train.features, train.targets, test.features).mean;
    } else {
        throw std::invalid_argument("baseline: unknown --algo '" + algo + "'");
    }

    std::vector<double> preds(preds_scaled.size());
    for (std::size_t i = 0; i < preds.size(); ++i)
        preds[i] = preds_scaled[i] * stats.target_std() + stats.target_mean();
    const MetricsReport metrics = compute_metrics(test_targets_raw, preds);

    const fs::path out(args.out_dir);
    write_text_atomic(out / "metrics.json", metrics_to_json(metrics).dump(2) + "\n");
    std::ostringstream csv;
    csv.precision(17);
    csv << "prediction\n";
    for (double v : preds) csv << v << '\n';
    write_text_atomic(out / "predictions.csv", csv.str());
    const auto manifest =
        manifest_json("baseline", cfg, args.config_path, args.data_path, timings,
                      {"metrics.json", "predictions.csv", "manifest.json"}, json{{"algo", algo}});
    write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

std::vector<std::string> split_values(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Architecture-searched two-stage regression pipeline for surface-roughness data"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string parameter, values_csv, algo, artifact_path, pred_path;

    auto add_common = [&](CLI::App* sub, bool needs_config, bool needs_data) {
        auto* c = sub->add_option("--config", args.config_path, "config JSON path");
        if (needs_config) c->required();
        auto* d = sub->add_option("--data", args.data_path, "input CSV path");
        if (needs_data) d->required();
        sub->add_option("--out", args.out_dir, "output directory")->required();
        sub->add_option("--seed", args.seed_override, "seed override");
        sub->add_option("--target-column", args.target_column, "name of the target column");
    };

    auto* run = app.add_subcommand("run", "full pipeline: augment, search, train, refine, evaluate");
    add_common(run, true, true);
    auto* sweep = app.add_subcommand("sweep", "re-run the pipeline over a parameter grid");
    add_common(sweep, true, true);
    sweep->add_option("--param", parameter, "poly_order or acquisition")->required();
    sweep->add_option("--values", values_csv, "comma-separated values")->required();
    auto* augment = app.add_subcommand("augment", "train the generative model and emit synthetic rows");
    add_common(augment, true, true);
    auto* search = app.add_subcommand("search", "architecture search only");
    add_common(search, true, true);
    auto* train = app.add_subcommand("train", "train/refine a fixed architecture from the config");
    add_common(train, true, true);
    auto* predict = app.add_subcommand("predict", "predict a features-only CSV with a saved artifact");
    add_common(predict, false, true);
    predict->add_option("--artifact", artifact_path, "artifact JSON path")->required();
    auto* evaluate = app.add_subcommand("evaluate", "metrics for predictions against a labeled CSV");
    add_common(evaluate, false, true);
    evaluate->add_option("--pred", pred_path, "predictions CSV path")->required();
    auto* baseline = app.add_subcommand("baseline", "fit a classical regressor on the same split");
    add_common(baseline, true, true);
    baseline->add_option("--algo", algo, "lr|ridge|lasso|enr|knn|gpr")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        if (run->parsed()) return cmd_run(args);
        if (sweep->parsed()) return cmd_sweep(args, parameter, split_values(values_csv));
        if (augment->parsed()) return cmd_augment(args);
        if (search->parsed()) return cmd_search(args);
        if (train->parsed()) return cmd_train(args);
        if (predict->parsed()) return cmd_predict(args, artifact_path);
        if (evaluate->parsed()) return cmd_evaluate(args, pred_path);
        if (baseline->parsed()) return cmd_baseline(args, algo);
        std::cerr << "error: no subcommand\n";
        return kExitConfigError;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

}  // namespace nasreg::cli
