#include "nasreg/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nasreg {

Matrix::Matrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), data_(rows * cols, value) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw std::invalid_argument("Matrix::from_rows: ragged rows");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + ")");
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    if (out.rows() != n || out.cols() != m) out = Matrix(n, m);
    std::fill(out.storage().begin(), out.storage().end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* out_row = out.storage().data() + i * m;
        const double* a_row = a.storage().data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a_row[p];
            const double* b_row = b.storage().data() + p * m;
            for (std::size_t j = 0; j < m; ++j) out_row[j] += av * b_row[j];
        }
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out;
    matmul_into(a, b, out);
    return out;
}

void matmul_at_into(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("matmul_at: row counts differ");
    const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
    if (out.rows() != n || out.cols() != m) out = Matrix(n, m);
    std::fill(out.storage().begin(), out.storage().end(), 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        const double* a_row = a.storage().data() + r * n;
        const double* b_row = b.storage().data() + r * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = a_row[i];
            double* out_row = out.storage().data() + i * m;
            for (std::size_t j = 0; j < m; ++j) out_row[j] += av * b_row[j];
        }
    }
}

void matmul_bt_into(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("matmul_bt: column counts differ");
    const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
    if (out.rows() != n || out.cols() != m) out = Matrix(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a_row = a.storage().data() + i * k;
        double* out_row = out.storage().data() + i * m;
        for (std::size_t j = 0; j < m; ++j) {
            const double* b_row = b.storage().data() + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += a_row[p] * b_row[p];
            out_row[j] = s;
        }
    }
}

Matrix transposed(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

namespace {

// Plain Cholesky; returns false when a pivot is not strictly positive.
bool try_factor(const Matrix& a, double jitter, Matrix& out) {
    const std::size_t n = a.rows();
    out = Matrix(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j) + jitter;
        for (std::size_t k = 0; k < j; ++k) d -= out(j, k) * out(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        out(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= out(i, k) * out(j, k);
            out(i, j) = s / ljj;
        }
    }
    return true;
}

}  // namespace

CholeskyResult cholesky_factor(const Matrix& a, double jitter) {
    if (a.rows() != a.cols()) throw std::invalid_argument("cholesky_factor: matrix not square");
    if (jitter < 0.0) throw std::invalid_argument("cholesky_factor: negative jitter");

    double scale = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            scale = std::max(scale, std::abs(a(i, j)));
            if (std::abs(a(i, j) - a(j, i)) > 1e-10 * std::max(1.0, scale))
                throw std::invalid_argument("cholesky_factor: matrix not symmetric");
        }

    constexpr double kMaxJitter = 1e-2;
    double j = jitter;
    while (true) {
        Matrix lower;
        if (try_factor(a, j, lower) && lower.all_finite()) return {std::move(lower), j};
        if (j >= kMaxJitter)
            throw std::runtime_error("cholesky_factor: not positive definite at jitter " +
                                     std::to_string(j));
        j = (j == 0.0) ? 1e-10 : j * 10.0;
        if (j > kMaxJitter) j = kMaxJitter;
    }
}

Matrix cholesky_solve(const Matrix& lower, const Matrix& b) {
    const std::size_t n = lower.rows();
    if (lower.cols() != n) throw std::invalid_argument("cholesky_solve: factor not square");
    if (b.rows() != n) throw std::invalid_argument("cholesky_solve: right-hand side row mismatch");

    Matrix x = b;
    const std::size_t m = b.cols();
    // forward: L z = b
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < m; ++c) {
            double s = x(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * x(k, c);
            x(i, c) = s / lower(i, i);
        }
    }
    // backward: L^T x = z
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t c = 0; c < m; ++c) {
            double s = x(ii, c);
            for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * x(k, c);
            x(ii, c) = s / lower(ii, ii);
        }
    }
    return x;
}

}  // namespace nasreg
