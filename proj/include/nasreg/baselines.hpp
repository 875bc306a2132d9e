#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nasreg/gp.hpp"
#include "nasreg/matrix.hpp"

namespace nasreg {

enum class PenaltyKind { None, Ridge, Lasso, ElasticNet };

struct Penalty {
    PenaltyKind kind = PenaltyKind::None;
    double lambda = 0.0;  // lambda2 for ridge, lambda1 for lasso, lambda for elastic net
    double alpha = 0.5;   // elastic-net mixing: 1 = lasso, 0 = ridge
};

// Weights include the intercept as the trailing entry; it is never penalized.
struct LinearModel {
    std::vector<double> weights;
    Penalty penalty;

    double intercept() const { return weights.back(); }
};

// None/ridge solved by normal equations (Cholesky); lasso/elastic net by
// cyclic coordinate descent with soft-thresholding, stopping when the largest
// weight change drops below 1e-8 or after 10000 sweeps. When given,
// sweep_objectives records the penalized objective after every sweep.
LinearModel fit_linear(const Matrix& x, std::span<const double> y, const Penalty& penalty,
                       std::vector<double>* sweep_objectives = nullptr);

double linear_predict(const LinearModel& m, std::span<const double> x);
std::vector<double> linear_predict(const LinearModel& m, const Matrix& x);

// Objective value of the penalized least-squares problem the fitters minimize.
double linear_objective(const Matrix& x, std::span<const double> y, const LinearModel& m);

// Mean target of the k nearest rows by Euclidean distance; ties broken by
// lower row index.
double knn_predict(const Matrix& train_x, std::span<const double> train_y,
                   std::span<const double> query, std::size_t k);

struct GprPrediction {
    std::vector<double> mean;
    std::vector<double> variance;
};

// GP regression on feature vectors; hyperparameters grid-selected unless given.
GprPrediction gpr_fit_predict(const Matrix& train_x, std::span<const double> train_y,
                              const Matrix& test_x,
                              const std::optional<KernelHyper>& hyper = std::nullopt);

}  // namespace nasreg
