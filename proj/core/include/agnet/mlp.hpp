// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agnet {

class Rng;

enum class Activation : std::uint8_t { linear = 0, relu = 1, sigmoid = 2 };

[[nodiscard]] std::string_view to_string(Activation a) noexcept;

/// Fully connected layer computing act(x·W + b) for row-vector inputs.
struct DenseLayer {
    Matrix weights; // fan_in × fan_out
    Matrix bias;    // 1 × fan_out
    Activation activation = Activation::linear;

    bool operator==(const DenseLayer&) const = default;
};

struct LayerSpec {
    std::size_t width;
    Activation activation;
};

/// Per-layer gradients, indexed like MlpModel::layers().
struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
};

/// Post-activation outputs of every layer; `outputs[0]` is the input batch.
struct ForwardTrace {
    std::vector<Matrix> outputs;

    [[nodiscard]] const Matrix& result() const { return outputs.back(); }
};

/// A stack of dense layers. Instances are rows: an n × input_dim batch maps
/// to an n × output_dim result.
class MlpModel {
public:
    MlpModel() = default;
    /// Throws ShapeError unless consecutive layer dimensions chain.
    explicit MlpModel(std::vector<DenseLayer> layers);

    /// Xavier-uniform weights, zero biases.
    static MlpModel create(std::size_t input_dim, std::span<const LayerSpec> specs, Rng& rng);

    [[nodiscard]] std::size_t input_dim() const noexcept;
    [[nodiscard]] std::size_t output_dim() const noexcept;
    [[nodiscard]] std::size_t parameter_count() const noexcept;
    [[nodiscard]] const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

    [[nodiscard]] Matrix forward(const Matrix& inputs) const;
    [[nodiscard]] ForwardTrace forward_trace(const Matrix& inputs) const;

    /// Backpropagates ∂L/∂output through the trace. When `input_grad` is
    /// non-null it receives ∂L/∂input.
    [[nodiscard]] MlpGradients backward(const ForwardTrace& trace, const Matrix& output_grad,
                                        Matrix* input_grad = nullptr) const;

    void apply_gradients(const MlpGradients& grads, double learning_rate);

    bool operator==(const MlpModel&) const = default;

private:
    std::vector<DenseLayer> layers_;
};

/// Accumulates `other` into `into`, which must have the same layout.
void accumulate(MlpGradients& into, const MlpGradients& other);

/// Binary model format:
///   "AGMLP" magic, u32 version, u32 layer count, then per layer
///   u32 fan_in, u32 fan_out, u8 activation, fan_in·fan_out weights and
///   fan_out biases as little-endian IEEE-754 doubles.
[[nodiscard]] std::string serialize_model(const MlpModel& model);
[[nodiscard]] MlpModel deserialize_model(std::string_view bytes);

void save_model(const MlpModel& model, const std::filesystem::path& path);
[[nodiscard]] MlpModel load_model(const std::filesystem::path& path);

} // namespace agnet
