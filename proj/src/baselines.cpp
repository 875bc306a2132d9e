#include "nasreg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nasreg {

namespace {

Matrix with_intercept(const Matrix& x) {
    Matrix out(x.rows(), x.cols() + 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::copy_n(x.row(r).begin(), x.cols(), out.row(r).begin());
        out(r, x.cols()) = 1.0;
    }
    return out;
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

LinearModel solve_normal_equations(const Matrix& xi, std::span<const double> y, const Penalty& penalty) {
    const std::size_t p = xi.cols();
    Matrix gram = matmul(transposed(xi), xi);
    if (penalty.kind == PenaltyKind::Ridge) {
        // objective (1/N)||y-Xw||^2 + lambda2 ||w||^2  =>  (X^T X + N*lambda2*I) w = X^T y
        const double n = static_cast<double>(xi.rows());
        for (std::size_t i = 0; i + 1 < p; ++i) gram(i, i) += n * penalty.lambda;
    }
    Matrix rhs(p, 1);
    for (std::size_t i = 0; i < p; ++i) {
        double s = 0.0;
        for (std::size_t r = 0; r < xi.rows(); ++r) s += xi(r, i) * y[r];
        rhs(i, 0) = s;
    }
    const auto [lower, jitter] = cholesky_factor(gram, 0.0);
    const Matrix w = cholesky_solve(lower, rhs);
    LinearModel m;
    m.penalty = penalty;
    m.weights.resize(p);
    for (std::size_t i = 0; i < p; ++i) m.weights[i] = w(i, 0);
    return m;
}

LinearModel solve_coordinate_descent(const Matrix& xi, std::span<const double> y, const Penalty& penalty,
                                     std::vector<double>* sweep_objectives) {
    const std::size_t n = xi.rows();
    const std::size_t p = xi.cols();  // intercept is the last column
    const double inv_n = 1.0 / static_cast<double>(n);

    // l1/l2 pieces of the penalty in objective terms
    const double l1 = penalty.kind == PenaltyKind::Lasso ? penalty.lambda : penalty.alpha * penalty.lambda;
    const double l2 = penalty.kind == PenaltyKind::Lasso ? 0.0 : (1.0 - penalty.alpha) * penalty.lambda;

    std::vector<double> w(p, 0.0);
    std::vector<double> residual(y.begin(), y.end());  // y - X w, w = 0 initially

    std::vector<double> col_sq(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += xi(r, j) * xi(r, j);
        col_sq[j] = s;
    }

    auto objective_now = [&] {
        double sq = 0.0;
        for (double r : residual) sq += r * r;
        double pl1 = 0.0, pl2 = 0.0;
        for (std::size_t j = 0; j + 1 < p; ++j) {
            pl1 += std::abs(w[j]);
            pl2 += w[j] * w[j];
        }
        return sq * inv_n + l1 * pl1 + l2 * pl2;
    };

    constexpr int kMaxSweeps = 10000;
    constexpr double kTol = 1e-8;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const bool is_intercept = (j + 1 == p);
            double rho = 0.0;  // (2/N) X_j^T (partial residual)
            for (std::size_t r = 0; r < n; ++r) rho += xi(r, j) * (residual[r] + xi(r, j) * w[j]);
            rho *= 2.0 * inv_n;
            const double denom = 2.0 * inv_n * col_sq[j] + (is_intercept ? 0.0 : 2.0 * l2);
            const double updated =
                is_intercept ? rho / denom : soft_threshold(rho, l1) / denom;
            const double delta = updated - w[j];
            if (delta != 0.0) {
                for (std::size_t r = 0; r < n; ++r) residual[r] -= xi(r, j) * delta;
                w[j] = updated;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        if (sweep_objectives) sweep_objectives->push_back(objective_now());
        if (max_change < kTol) break;
    }
    LinearModel m;
    m.penalty = penalty;
    m.weights = std::move(w);
    return m;
}

}  // namespace

LinearModel fit_linear(const Matrix& x, std::span<const double> y, const Penalty& penalty,
                       std::vector<double>* sweep_objectives) {
    if (x.rows() < 1) throw std::invalid_argument("fit_linear: empty design matrix");
    if (x.rows() != y.size()) throw std::invalid_argument("fit_linear: row/target mismatch");
    if (penalty.lambda < 0.0 || penalty.alpha < 0.0 || penalty.alpha > 1.0)
        throw std::invalid_argument("fit_linear: invalid penalty");

    const Matrix xi = with_intercept(x);
    if (penalty.kind == PenaltyKind::None || penalty.kind == PenaltyKind::Ridge)
        return solve_normal_equations(xi, y, penalty);
    return solve_coordinate_descent(xi, y, penalty, sweep_objectives);
}

double linear_predict(const LinearModel& m, std::span<const double> x) {
    if (x.size() + 1 != m.weights.size())
        throw std::invalid_argument("linear_predict: feature width mismatch");
    double s = m.weights.back();
    for (std::size_t i = 0; i < x.size(); ++i) s += m.weights[i] * x[i];
    return s;
}

std::vector<double> linear_predict(const LinearModel& m, const Matrix& x) {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = linear_predict(m, x.row(r));
    return out;
}

double linear_objective(const Matrix& x, std::span<const double> y, const LinearModel& m) {
    const auto preds = linear_predict(m, x);
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - preds[i];
        sq += e * e;
    }
    double obj = sq / static_cast<double>(y.size());
    const auto& pen = m.penalty;
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i + 1 < m.weights.size(); ++i) {  // intercept excluded
        l1 += std::abs(m.weights[i]);
        l2 += m.weights[i] * m.weights[i];
    }
    switch (pen.kind) {
        case PenaltyKind::None: break;
        case PenaltyKind::Ridge: obj += pen.lambda * l2; break;
        case PenaltyKind::Lasso: obj += pen.lambda * l1; break;
        case PenaltyKind::ElasticNet: obj += pen.alpha * pen.lambda * l1 + (1.0 - pen.alpha) * pen.lambda * l2; break;
    }
    return obj;
}

double knn_predict(const Matrix& train_x, std::span<const double> train_y,
                   std::span<const double> query, std::size_t k) {
    const std::size_t n = train_x.rows();
    if (n == 0) throw std::invalid_argument("knn_predict: empty training set");
    if (k < 1 || k > n) throw std::invalid_argument("knn_predict: k must be in [1, n]");
    if (query.size() != train_x.cols()) throw std::invalid_argument("knn_predict: query width mismatch");

    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t r = 0; r < n; ++r) {
        double sq = 0.0;
        for (std::size_t c = 0; c < train_x.cols(); ++c) {
            const double d = train_x(r, c) - query[c];
            sq += d * d;
        }
        dist[r] = {sq, r};
    }
    std::sort(dist.begin(), dist.end());  // pair ordering breaks ties by index
    double mean = 0.0;
    for (std::size_t i = 0; i < k; ++i) mean += train_y[dist[i].second];
    return mean / static_cast<double>(k);
}

GprPrediction gpr_fit_predict(const Matrix& train_x, std::span<const double> train_y,
                              const Matrix& test_x, const std::optional<KernelHyper>& hyper) {
    if (test_x.cols() != train_x.cols())
        throw std::invalid_argument("gpr_fit_predict: feature width mismatch");
    const GpSurrogate s = hyper ? gp_fit_with(train_x, train_y, *hyper) : gp_fit(train_x, train_y);
    GprPrediction out;
    out.mean.resize(test_x.rows());
    out.variance.resize(test_x.rows());
    for (std::size_t r = 0; r < test_x.rows(); ++r) {
        const GpPosterior p = gp_posterior(s, test_x.row(r));
        out.mean[r] = p.mean;
        out.variance[r] = p.variance;
    }
    return out;
}

}  // namespace nasreg
