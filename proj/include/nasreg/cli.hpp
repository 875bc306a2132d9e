#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nasreg/pipeline.hpp"

namespace nasreg::cli {

constexpr inline const char* kToolVersion = "0.1.0";

// Exit codes shared by every subcommand.
constexpr inline int kExitOk = 0;
constexpr inline int kExitConfigError = 1;
constexpr inline int kExitDataError = 2;
constexpr inline int kExitDivergence = 3;

// Per-run baseline settings carried in the "baseline" config section.
struct BaselineConfig {
    double lambda = 0.1;
    double alpha = 0.5;
    int k = 5;
};

struct CliConfig {
    PipelineConfig pipeline;
    BaselineConfig baseline;
};

CliConfig cli_config_from_json(const json& j);
CliConfig load_cli_config(const std::filesystem::path& path);

// 64-bit FNV-1a of a file's bytes, hex-encoded; used in run manifests.
std::string file_digest(const std::filesystem::path& path);

// Temp-file-then-rename; no partial outputs on failure.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// Entry point used by the binary and by tests. argv[0] is the program name.
int run_cli(int argc, const char* const* argv);

}  // namespace nasreg::cli
