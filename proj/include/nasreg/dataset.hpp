#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nasreg/matrix.hpp"
#include "nasreg/rng.hpp"

namespace nasreg {

// Thrown for unreadable or malformed input data (CSV parse errors, width
// mismatches, empty splits). The CLI maps it to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Dataset {
    std::vector<std::string> feature_names;
    std::string target_name = "target";
    Matrix features;  // rows = samples
    std::vector<double> targets;
    std::vector<bool> synthetic_flags;

    std::size_t n_rows() const noexcept { return targets.size(); }
    std::size_t n_features() const noexcept { return features.cols(); }
};

// Per-column mean/std over features plus the target (last entry).
// Population standard deviation (ddof = 0).
struct NormStats {
    std::vector<double> means;
    std::vector<double> stds;

    double target_mean() const { return means.back(); }
    double target_std() const { return stds.back(); }
};

struct MetricsReport {
    std::optional<double> mape;  // absent when some target is zero
    double rmse = 0.0;
    double std_dev = 0.0;
    std::size_t n = 0;
};

// One header row, all cells numeric, '.' decimal separator. The target is the
// named column, or the last column when no name is given.
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& target_column = std::nullopt);

void write_csv(const Dataset& d, const std::filesystem::path& path, bool synthetic_column = false);

NormStats fit_normalizer(const Dataset& d);

// Forward: (x - mean) / std with zero-std columns mapped to 0.
// Inverse: x * std + mean.
Dataset apply_normalizer(const Dataset& d, const NormStats& s, bool invert = false);

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
};

// Seeded shuffled partition; split sizes floor(n*frac), remainder to test.
SplitResult split(const Dataset& d, double train_frac, double val_frac, Rng& rng);

Dataset take_rows(const Dataset& d, std::span<const std::size_t> indices);

// All monomials of the input with total degree <= order, graded-lex ordered
// starting with the constant 1. Output length is C(n + order, order).
std::vector<double> poly_augment(std::span<const double> x, int order);
std::size_t poly_augment_size(std::size_t n_features, int order);
std::vector<std::string> poly_feature_names(const std::vector<std::string>& names, int order);
Dataset poly_augment_dataset(const Dataset& d, int order);

MetricsReport compute_metrics(std::span<const double> y, std::span<const double> yhat);

}  // namespace nasreg
