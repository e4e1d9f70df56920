// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace agnet {

class Rng;

/// Row-major dense matrix of doubles.
///
/// Every free function in this header validates shapes eagerly and throws
/// ShapeError on mismatch; results are checked for finiteness and a
/// NumericError is raised if anything overflowed.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] Matrix transposed() const;
    /// Rows at the given indices, in order.
    [[nodiscard]] Matrix gather_rows(std::span<const std::size_t> indices) const;
    /// Columns at the given indices, in order.
    [[nodiscard]] Matrix gather_cols(std::span<const std::size_t> indices) const;

    [[nodiscard]] std::string shape_string() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Throws NumericError naming `context` if any entry is NaN or infinite.
void ensure_finite(const Matrix& m, const char* context);

[[nodiscard]] Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
[[nodiscard]] Matrix matmul_at_b(const Matrix& a, const Matrix& b);
/// a·bᵀ without materializing the transpose.
[[nodiscard]] Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

[[nodiscard]] Matrix add(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix subtract(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix scale(const Matrix& a, double factor);
/// Adds the 1×cols row vector `bias` to every row of `a`.
[[nodiscard]] Matrix add_row_vector(const Matrix& a, const Matrix& bias);
/// 1×cols matrix of per-column sums.
[[nodiscard]] Matrix column_sums(const Matrix& a);
[[nodiscard]] double frobenius_norm_sq(const Matrix& a);
[[nodiscard]] double max_abs_difference(const Matrix& a, const Matrix& b);

[[nodiscard]] double sigmoid(double x) noexcept;
/// log(1 + e^x), evaluated as max(x, 0) + log1p(e^{-|x|}).
[[nodiscard]] double softplus(double x) noexcept;

[[nodiscard]] Matrix relu(const Matrix& x);
/// Elementwise logistic function. Results are clamped into the open
/// interval (0, 1) so saturated inputs never produce exactly 0 or 1.
[[nodiscard]] Matrix sigmoid(const Matrix& x);

/// Mini-batch SGD hyper-parameters with a geometric per-iteration decay.
struct SgdSchedule {
    double initial_lr = 1e-3;
    double per_iteration_decay = 1e-4;
    std::size_t batch_size = 32;

    /// initial_lr · (1 − per_iteration_decay)^iteration
    [[nodiscard]] double learning_rate(std::size_t iteration) const;
    void validate() const;
};

[[nodiscard]] Matrix sgd_step(const Matrix& params, const Matrix& grads, const SgdSchedule& schedule,
                              std::size_t iteration);
/// In-place form of sgd_step used by the trainers.
void apply_sgd(Matrix& params, const Matrix& grads, double learning_rate);

using ScalarFunction = std::function<double(const Matrix&)>;

/// Central-difference gradient of `loss` at `at`.
[[nodiscard]] Matrix finite_diff_gradient(const ScalarFunction& loss, const Matrix& at, double eps);

/// Glorot/Xavier uniform initialization for a fan_in × fan_out weight matrix.
[[nodiscard]] Matrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

} // namespace agnet
