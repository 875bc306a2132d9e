#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nasreg {

// Dense row-major matrix of 64-bit floats.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& storage() noexcept { return data_; }
    const std::vector<double>& storage() const noexcept { return data_; }

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transposed(const Matrix& a);

// Overwriting variants used by training loops to avoid per-step allocation.
// Accumulation order matches matmul on (transposed) inputs.
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_at_into(const Matrix& a, const Matrix& b, Matrix& out);  // a^T b
void matmul_bt_into(const Matrix& a, const Matrix& b, Matrix& out);  // a b^T

// x such that (L L^T) x = b, given the lower factor from cholesky_factor.
Matrix cholesky_solve(const Matrix& lower, const Matrix& b);

struct CholeskyResult {
    Matrix lower;
    double jitter = 0.0;  // diagonal shift actually applied
};

// Lower-triangular L with L L^T = a + jitter*I. If factorization fails the
// jitter escalates by factors of 10 (starting at 1e-10 when the requested
// jitter is 0) up to 1e-2; failure at the cap throws.
CholeskyResult cholesky_factor(const Matrix& a, double jitter = 0.0);

}  // namespace nasreg
