// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/attribute_nets.hpp"
#include "agnet/dataset.hpp"
#include "agnet/mlp.hpp"
#include "agnet/numerics.hpp"
#include "agnet/retrieval.hpp"
#include "agnet/similarity.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace agnet {

class Rng;

/// Weights of the attribute-similarity (lambda) and quantization/balance
/// (eta) terms of the attribute-to-hash objective.
struct LossWeights {
    double lambda = 1.0;
    double eta = 1.0;

    void validate() const;
};

/// Attribute-to-hash network shared by both modalities. The last layer is
/// linear with `code_length` outputs.
struct A2HModel {
    MlpModel net;

    [[nodiscard]] std::size_t code_length() const noexcept { return net.output_dim(); }
    [[nodiscard]] std::size_t attribute_dim() const noexcept { return net.input_dim(); }

    bool operator==(const A2HModel&) const = default;
};

inline const std::vector<std::size_t> kA2HHidden{128, 128};

/// Builds ReLU → sigmoid hidden layers (one activation per listed width,
/// alternating as relu, sigmoid, relu, ...) and a linear head of width
/// `code_length`.
[[nodiscard]] A2HModel make_a2h(std::size_t attribute_dim, std::size_t code_length,
                                std::span<const std::size_t> hidden, Rng& rng);

/// Throws ValidationError unless the net ends in a linear layer.
[[nodiscard]] A2HModel as_a2h(MlpModel net);

// The loss functions below take P and Q as c × M matrices whose columns are
// the network outputs of the M batch instances (visual side P, text side Q),
// and the M × M similarity matrices of the same batch.

/// ½·pᵀq.
[[nodiscard]] double theta_pair(std::span<const double> p_col, std::span<const double> q_col);

/// sign(P) with sign(0) = +1.
[[nodiscard]] Matrix binarize(const Matrix& p);

/// −Σ_ij (S_ij Θ_ij − log(1 + e^{Θ_ij})), Θ = ½PᵀQ.
[[nodiscard]] double loss_cs(const Matrix& p, const Matrix& q, const Matrix& s_cat);
/// Σ_ij σ(φ_ij S^att_ij), φ = ½PᵀP.
[[nodiscard]] double loss_as(const Matrix& p, const Matrix& s_att);
/// ‖B − P‖²_F + ‖P·1‖², the second term being the per-bit batch sums.
[[nodiscard]] double loss_reg(const Matrix& p, const Matrix& b);

struct LossTerms {
    double cs = 0.0;
    double as = 0.0;
    double reg = 0.0;
    double total = 0.0;
};

[[nodiscard]] LossTerms loss_terms(const Matrix& p, const Matrix& q, const Matrix& b, const Matrix& s_cat,
                                   const Matrix& s_att, const LossWeights& w);
[[nodiscard]] double loss_total(const Matrix& p, const Matrix& q, const Matrix& b, const Matrix& s_cat,
                                const Matrix& s_att, const LossWeights& w);

/// ∂loss_total/∂P with B held constant.
[[nodiscard]] Matrix grad_P(const Matrix& p, const Matrix& q, const Matrix& b, const Matrix& s_cat,
                            const Matrix& s_att, const LossWeights& w);
/// ∂loss_cs/∂Q.
[[nodiscard]] Matrix grad_Q(const Matrix& p, const Matrix& q, const Matrix& s_cat);

/// Scale applied to the batch objective before the SGD step. The reported
/// loss terms are always the unscaled batch sums.
enum class LossNormalization {
    sum,        // the batch sums as written
    per_anchor, // divided by M
    per_pair,   // divided by M²
};

struct A2HTrainOptions {
    /// Backpropagate the text-side category loss gradient into the shared net.
    bool grad_q_enabled = true;
    LossNormalization normalization = LossNormalization::per_pair;
};

struct A2HIteration {
    std::size_t iteration;
    double learning_rate;
    LossTerms loss;
};

struct A2HTrainResult {
    A2HModel model;
    std::vector<A2HIteration> trace;
};

/// ⌊n / batch⌋, or 1 when n < batch (one short batch).
[[nodiscard]] std::size_t a2h_iterations_per_epoch(std::size_t n, std::size_t batch_size);

/// Mini-batch training loop: each iteration samples M instances (without
/// replacement within an epoch), builds S^(c) and S^(att) from the labels and
/// their ground-truth class attributes, forwards both modalities through the
/// shared net, recomputes B = sign(P), and takes one SGD step.
///
/// Row i of `pred_visual`/`pred_text` and `labels[i]` describe the same
/// instance; `attribute_table` row `label − 1` holds that class's attributes.
[[nodiscard]] A2HTrainResult train_a2h(A2HModel model, const AttributePrediction& pred_visual,
                                       const AttributePrediction& pred_text, std::span<const Label> labels,
                                       const Matrix& attribute_table, const SgdSchedule& schedule,
                                       const LossWeights& weights, std::size_t iterations, Rng& rng,
                                       const A2HTrainOptions& options = {});

/// n × c real outputs of the hash net.
[[nodiscard]] Matrix hash_outputs(const A2HModel& model, const AttributePrediction& pred);

/// Bit b is set iff output coordinate b is ≥ 0.
[[nodiscard]] CodeMatrix encode(const A2HModel& model, const AttributePrediction& pred,
                                std::span<const Label> labels);

/// Packs real outputs (n × c) into codes with the same sign convention.
[[nodiscard]] CodeMatrix pack_signs(const Matrix& outputs, std::span<const Label> labels);

/// CSV `iteration,lr,loss_cs,loss_as,loss_reg,loss_total`.
void write_a2h_trace(const std::vector<A2HIteration>& trace, const std::filesystem::path& path);

} // namespace agnet
