// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/numerics.hpp"

#include "agnet/errors.hpp"
#include "agnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace agnet {

namespace {

[[noreturn]] void shape_mismatch(const char* op, const Matrix& a, const Matrix& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                     b.shape_string());
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        shape_mismatch(op, a, b);
    }
}

constexpr double kSigmoidLow = std::numeric_limits<double>::min();
const double kSigmoidHigh = std::nextafter(1.0, 0.0);

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ShapeError("Matrix: data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw ShapeError("Matrix: ragged initializer list");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_) {
            throw ShapeError("gather_rows: index " + std::to_string(indices[i]) + " out of range for " +
                             shape_string());
        }
        std::ranges::copy(row(indices[i]), out.row(i).begin());
    }
    return out;
}

Matrix Matrix::gather_cols(std::span<const std::size_t> indices) const {
    Matrix out(rows_, indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        if (indices[j] >= cols_) {
            throw ShapeError("gather_cols: index " + std::to_string(indices[j]) + " out of range for " +
                             shape_string());
        }
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t j = 0; j < indices.size(); ++j) {
            out(r, j) = (*this)(r, indices[j]);
        }
    }
    return out;
}

std::string Matrix::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void ensure_finite(const Matrix& m, const char* context) {
    for (double v : m.data()) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(context) + ": non-finite value in " + m.shape_string() +
                               " result");
        }
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        shape_mismatch("matmul", a, b);
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t inner = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            auto b_row = b.row(k);
            for (std::size_t j = 0; j < out_row.size(); ++j) {
                out_row[j] += aik * b_row[j];
            }
        }
    }
    ensure_finite(out, "matmul");
    return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        shape_mismatch("matmul_at_b", a, b);
    }
    Matrix out(a.cols(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto a_row = a.row(r);
        auto b_row = b.row(r);
        for (std::size_t i = 0; i < a_row.size(); ++i) {
            const double ari = a_row[i];
            if (ari == 0.0) {
                continue;
            }
            auto out_row = out.row(i);
            for (std::size_t j = 0; j < b_row.size(); ++j) {
                out_row[j] += ari * b_row[j];
            }
        }
    }
    ensure_finite(out, "matmul_at_b");
    return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        shape_mismatch("matmul_a_bt", a, b);
    }
    // Row-by-row dot products do not vectorize without reassociation; the
    // explicit transpose lets matmul's axpy inner loop do the work instead.
    return matmul(a, b.transposed());
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape("add", a, b);
    Matrix out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] += bd[i];
    }
    ensure_finite(out, "add");
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    require_same_shape("subtract", a, b);
    Matrix out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] -= bd[i];
    }
    ensure_finite(out, "subtract");
    return out;
}

Matrix scale(const Matrix& a, double factor) {
    Matrix out = a;
    for (double& v : out.data()) {
        v *= factor;
    }
    ensure_finite(out, "scale");
    return out;
}

Matrix add_row_vector(const Matrix& a, const Matrix& bias) {
    if (bias.rows() != 1 || bias.cols() != a.cols()) {
        shape_mismatch("add_row_vector", a, bias);
    }
    Matrix out = a;
    auto b = bias.row(0);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto o = out.row(r);
        for (std::size_t c = 0; c < o.size(); ++c) {
            o[c] += b[c];
        }
    }
    ensure_finite(out, "add_row_vector");
    return out;
}

Matrix column_sums(const Matrix& a) {
    Matrix out(1, a.cols());
    auto o = out.row(0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto ar = a.row(r);
        for (std::size_t c = 0; c < ar.size(); ++c) {
            o[c] += ar[c];
        }
    }
    return out;
}

double frobenius_norm_sq(const Matrix& a) {
    double acc = 0.0;
    for (double v : a.data()) {
        acc += v * v;
    }
    return acc;
}

double max_abs_difference(const Matrix& a, const Matrix& b) {
    require_same_shape("max_abs_difference", a, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    }
    return worst;
}

double sigmoid(double x) noexcept {
    const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return std::clamp(s, kSigmoidLow, kSigmoidHigh);
}

double softplus(double x) noexcept {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

Matrix relu(const Matrix& x) {
    Matrix out = x;
    for (double& v : out.data()) {
        v = v > 0.0 ? v : 0.0;
    }
    return out;
}

Matrix sigmoid(const Matrix& x) {
    Matrix out = x;
    for (double& v : out.data()) {
        v = sigmoid(v);
    }
    return out;
}

double SgdSchedule::learning_rate(std::size_t iteration) const {
    return initial_lr * std::pow(1.0 - per_iteration_decay, static_cast<double>(iteration));
}

void SgdSchedule::validate() const {
    if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) {
        throw ValidationError("SgdSchedule: initial learning rate must be positive");
    }
    if (!(per_iteration_decay >= 0.0 && per_iteration_decay < 1.0)) {
        throw ValidationError("SgdSchedule: per-iteration decay must lie in [0, 1)");
    }
    if (batch_size == 0) {
        throw ValidationError("SgdSchedule: batch size must be at least 1");
    }
}

Matrix sgd_step(const Matrix& params, const Matrix& grads, const SgdSchedule& schedule,
                std::size_t iteration) {
    require_same_shape("sgd_step", params, grads);
    Matrix out = params;
    apply_sgd(out, grads, schedule.learning_rate(iteration));
    return out;
}

void apply_sgd(Matrix& params, const Matrix& grads, double learning_rate) {
    require_same_shape("apply_sgd", params, grads);
    auto p = params.data();
    auto g = grads.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] -= learning_rate * g[i];
    }
    ensure_finite(params, "sgd update");
}

Matrix finite_diff_gradient(const ScalarFunction& loss, const Matrix& at, double eps) {
    if (!(eps > 0.0)) {
        throw ValidationError("finite_diff_gradient: eps must be positive");
    }
    Matrix grad(at.rows(), at.cols());
    Matrix probe = at;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double original = probe.data()[i];
        probe.data()[i] = original + eps;
        const double up = loss(probe);
        probe.data()[i] = original - eps;
        const double down = loss(probe);
        probe.data()[i] = original;
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw NumericError("finite_diff_gradient: loss is not finite near entry " + std::to_string(i));
        }
        grad.data()[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

Matrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& v : w.data()) {
        v = rng.uniform(-limit, limit);
    }
    return w;
}

} // namespace agnet
