// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/a2h.hpp"

#include "agnet/errors.hpp"
#include "agnet/rng.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agnet {

namespace {

void require_square(const char* op, const Matrix& s, std::size_t m) {
    if (s.rows() != m || s.cols() != m) {
        throw ShapeError(std::string(op) + ": similarity " + s.shape_string() + " does not match batch of " +
                         std::to_string(m));
    }
}

void require_same(const char* op, const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
    }
}

// ½·AᵀB for c × M operands.
Matrix half_gram(const Matrix& a, const Matrix& b) {
    Matrix g = matmul_at_b(a, b);
    for (double& v : g.data()) {
        v *= 0.5;
    }
    return g;
}

// σ(Θ) − S^(c), the shared factor of both category-loss gradients.
Matrix category_residual(const Matrix& p, const Matrix& q, const Matrix& s_cat) {
    require_same("category loss", p, q);
    require_square("category loss", s_cat, p.cols());
    Matrix e = half_gram(p, q);
    auto ev = e.data();
    auto sv = s_cat.data();
    for (std::size_t k = 0; k < ev.size(); ++k) {
        ev[k] = sigmoid(ev[k]) - sv[k];
    }
    return e;
}

} // namespace

void LossWeights::validate() const {
    if (!(lambda >= 0.0) || !(eta >= 0.0) || !std::isfinite(lambda) || !std::isfinite(eta)) {
        throw ValidationError("loss weights lambda and eta must be finite and non-negative");
    }
}

A2HModel make_a2h(std::size_t attribute_dim, std::size_t code_length, std::span<const std::size_t> hidden,
                  Rng& rng) {
    std::vector<LayerSpec> specs;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        specs.push_back({hidden[i], i % 2 == 0 ? Activation::relu : Activation::sigmoid});
    }
    specs.push_back({code_length, Activation::linear});
    return A2HModel{MlpModel::create(attribute_dim, specs, rng)};
}

A2HModel as_a2h(MlpModel net) {
    if (net.layers().empty() || net.layers().back().activation != Activation::linear) {
        throw ValidationError("hash net must end in a linear layer");
    }
    return A2HModel{std::move(net)};
}

double theta_pair(std::span<const double> p_col, std::span<const double> q_col) {
    if (p_col.size() != q_col.size()) {
        throw ShapeError("theta_pair: lengths " + std::to_string(p_col.size()) + " and " +
                         std::to_string(q_col.size()));
    }
    double dot = 0.0;
    for (std::size_t k = 0; k < p_col.size(); ++k) {
        dot += p_col[k] * q_col[k];
    }
    return 0.5 * dot;
}

Matrix binarize(const Matrix& p) {
    Matrix b = p;
    for (double& v : b.data()) {
        v = v >= 0.0 ? 1.0 : -1.0;
    }
    return b;
}

double loss_cs(const Matrix& p, const Matrix& q, const Matrix& s_cat) {
    require_same("loss_cs", p, q);
    require_square("loss_cs", s_cat, p.cols());
    const Matrix theta = half_gram(p, q);
    double total = 0.0;
    auto t = theta.data();
    auto s = s_cat.data();
    for (std::size_t k = 0; k < t.size(); ++k) {
        total += s[k] * t[k] - softplus(t[k]);
    }
    return -total;
}

double loss_as(const Matrix& p, const Matrix& s_att) {
    require_square("loss_as", s_att, p.cols());
    const Matrix phi = half_gram(p, p);
    double total = 0.0;
    auto f = phi.data();
    auto s = s_att.data();
    for (std::size_t k = 0; k < f.size(); ++k) {
        total += sigmoid(f[k] * s[k]);
    }
    return total;
}

double loss_reg(const Matrix& p, const Matrix& b) {
    require_same("loss_reg", p, b);
    double quantization = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double diff = b.data()[k] - p.data()[k];
        quantization += diff * diff;
    }
    double balance = 0.0;
    for (std::size_t r = 0; r < p.rows(); ++r) {
        double bit_sum = 0.0;
        for (double v : p.row(r)) {
            bit_sum += v;
        }
        balance += bit_sum * bit_sum;
    }
    return quantization + balance;
}

LossTerms loss_terms(const Matrix& p, const Matrix& q, const Matrix& b, const Matrix& s_cat, const Matrix& s_att,
                     const LossWeights& w) {
    LossTerms t;
    t.cs = loss_cs(p, q, s_cat);
    t.as = loss_as(p, s_att);
    t.reg = loss_reg(p, b);
    t.total = t.cs + w.lambda * t.as + w.eta * t.reg;
    return t;
}

double loss_total(const Matrix& p, const Matrix& q, const Matrix& b, const Matrix& s_cat, const Matrix& s_att,
                  const LossWeights& w) {
    return loss_terms(p, q, b, s_cat, s_att, w).total;
}

Matrix grad_P(const Matrix& p, const Matrix& q, const Matrix& b, const Matrix& s_cat, const Matrix& s_att,
              const LossWeights& w) {
    require_same("grad_P", p, b);
    require_square("grad_P", s_att, p.cols());
    const std::size_t m = p.cols();

    // Category term: ½ Σ_j (σ(Θ_ij) − S_ij) q_j.
    Matrix grad = matmul_a_bt(q, category_residual(p, q, s_cat));
    for (double& v : grad.data()) {
        v *= 0.5;
    }

    if (w.lambda != 0.0) {
        // Attribute term: with F_ij = σ'(φ_ij S_ij) S_ij, ∂/∂p_k = ½ Σ_j (F_kj + F_jk) p_j.
        const Matrix phi = half_gram(p, p);
        Matrix f(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double sig = sigmoid(phi(i, j) * s_att(i, j));
                f(i, j) = sig * (1.0 - sig) * s_att(i, j);
            }
        }
        Matrix sym(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                sym(i, j) = 0.5 * (f(i, j) + f(j, i));
            }
        }
        const Matrix attr = matmul(p, sym);
        for (std::size_t k = 0; k < grad.size(); ++k) {
            grad.data()[k] += w.lambda * attr.data()[k];
        }
    }

    if (w.eta != 0.0) {
        // Quantization 2(P − B) plus balance 2·(P·1) broadcast to every column.
        for (std::size_t r = 0; r < p.rows(); ++r) {
            double bit_sum = 0.0;
            for (double v : p.row(r)) {
                bit_sum += v;
            }
            for (std::size_t i = 0; i < m; ++i) {
                grad(r, i) += w.eta * (2.0 * (p(r, i) - b(r, i)) + 2.0 * bit_sum);
            }
        }
    }
    ensure_finite(grad, "grad_P");
    return grad;
}

Matrix grad_Q(const Matrix& p, const Matrix& q, const Matrix& s_cat) {
    // ½ Σ_i (σ(Θ_ij) − S_ij) p_i for column j.
    Matrix grad = matmul(p, category_residual(p, q, s_cat));
    for (double& v : grad.data()) {
        v *= 0.5;
    }
    ensure_finite(grad, "grad_Q");
    return grad;
}

std::size_t a2h_iterations_per_epoch(std::size_t n, std::size_t batch_size) {
    if (batch_size == 0) {
        throw ValidationError("batch size must be positive");
    }
    return std::max<std::size_t>(1, n / batch_size);
}

A2HTrainResult train_a2h(A2HModel model, const AttributePrediction& pred_visual, const AttributePrediction& pred_text,
                         std::span<const Label> labels, const Matrix& attribute_table, const SgdSchedule& schedule,
                         const LossWeights& weights, std::size_t iterations, Rng& rng,
                         const A2HTrainOptions& options) {
    schedule.validate();
    weights.validate();
    const std::size_t n = labels.size();
    if (n == 0) {
        throw ValidationError("train_a2h: empty training set");
    }
    if (pred_visual.rows() != n || pred_text.rows() != n) {
        throw ShapeError("train_a2h: " + std::to_string(n) + " labels but predictions have " +
                         std::to_string(pred_visual.rows()) + " / " + std::to_string(pred_text.rows()) + " rows");
    }
    if (pred_visual.cols() != model.attribute_dim() || pred_text.cols() != model.attribute_dim() ||
        attribute_table.cols() != model.attribute_dim()) {
        throw ShapeError("train_a2h: attribute dimension does not match the hash net input");
    }
    for (Label l : labels) {
        if (l < 1 || l > attribute_table.rows()) {
            throw ValidationError("train_a2h: label " + std::to_string(l) + " has no attribute row");
        }
    }

    A2HTrainResult result;
    const std::size_t m = std::min(schedule.batch_size, n);
    const std::size_t per_epoch = a2h_iterations_per_epoch(n, m);
    const double md = static_cast<double>(m);
    const double step_scale = options.normalization == LossNormalization::sum          ? 1.0
                              : options.normalization == LossNormalization::per_anchor ? 1.0 / md
                                                                                       : 1.0 / (md * md);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> batch(m);
    std::vector<Label> batch_labels(m);
    std::vector<std::size_t> batch_rows(m);
    Matrix batch_attrs(m, attribute_table.cols());

    for (std::size_t it = 0; it < iterations; ++it) {
        const std::size_t slot = it % per_epoch;
        if (slot == 0) {
            rng.shuffle(std::span<std::size_t>(order));
        }
        for (std::size_t k = 0; k < m; ++k) {
            batch[k] = order[slot * m + k];
            batch_labels[k] = labels[batch[k]];
            batch_rows[k] = batch_labels[k] - 1;
        }
        const SimilarityPair sim = make_similarity(attribute_table.gather_rows(batch_rows), batch_labels);

        const ForwardTrace vis = model.net.forward_trace(pred_visual.values().gather_rows(batch));
        const ForwardTrace txt = model.net.forward_trace(pred_text.values().gather_rows(batch));
        const Matrix p = vis.result().transposed();
        const Matrix q = txt.result().transposed();
        const Matrix b = binarize(p);

        const double lr = schedule.learning_rate(it);
        const LossTerms terms = loss_terms(p, q, b, sim.s_cat, sim.s_att, weights);
        if (!std::isfinite(terms.total)) {
            throw NumericError("train_a2h: non-finite loss at iteration " + std::to_string(it));
        }
        result.trace.push_back({it + 1, lr, terms});

        MlpGradients grads = model.net.backward(vis, grad_P(p, q, b, sim.s_cat, sim.s_att, weights).transposed());
        if (options.grad_q_enabled) {
            accumulate(grads, model.net.backward(txt, grad_Q(p, q, sim.s_cat).transposed()));
        }
        model.net.apply_gradients(grads, lr * step_scale);
    }
    result.model = std::move(model);
    return result;
}

Matrix hash_outputs(const A2HModel& model, const AttributePrediction& pred) {
    return model.net.forward(pred.values());
}

CodeMatrix pack_signs(const Matrix& outputs, std::span<const Label> labels) {
    if (outputs.rows() != labels.size()) {
        throw ShapeError("pack_signs: " + std::to_string(outputs.rows()) + " outputs for " +
                         std::to_string(labels.size()) + " labels");
    }
    CodeMatrix codes(outputs.cols());
    codes.reserve(outputs.rows());
    std::vector<std::uint64_t> words(codes.words_per_code());
    for (std::size_t i = 0; i < outputs.rows(); ++i) {
        std::ranges::fill(words, 0);
        auto row = outputs.row(i);
        for (std::size_t bit = 0; bit < row.size(); ++bit) {
            if (row[bit] >= 0.0) {
                words[bit / 64] |= std::uint64_t{1} << (bit % 64);
            }
        }
        codes.push_back(words, labels[i]);
    }
    return codes;
}

CodeMatrix encode(const A2HModel& model, const AttributePrediction& pred, std::span<const Label> labels) {
    return pack_signs(hash_outputs(model, pred), labels);
}

void write_a2h_trace(const std::vector<A2HIteration>& trace, const std::filesystem::path& path) {
    std::string out = "iteration,lr,loss_cs,loss_as,loss_reg,loss_total\n";
    for (const auto& r : trace) {
        out += std::to_string(r.iteration) + "," + detail::format_double(r.learning_rate) + "," +
               detail::format_double(r.loss.cs) + "," + detail::format_double(r.loss.as) + "," +
               detail::format_double(r.loss.reg) + "," + detail::format_double(r.loss.total) + "\n";
    }
    detail::write_text(path, out);
}

} // namespace agnet
