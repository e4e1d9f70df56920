// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/mlp.hpp"

#include "agnet/binary_io.hpp"
#include "agnet/errors.hpp"
#include "agnet/rng.hpp"

namespace agnet {

namespace {

constexpr std::string_view kModelMagic = "AGMLP";
constexpr std::uint32_t kModelVersion = 1;

Matrix activate(const Matrix& z, Activation a) {
    switch (a) {
    case Activation::relu:
        return relu(z);
    case Activation::sigmoid:
        return sigmoid(z);
    case Activation::linear:
        break;
    }
    return z;
}

// Multiplies `grad` in place by the activation derivative, expressed in
// terms of the post-activation output.
void scale_by_derivative(Matrix& grad, const Matrix& output, Activation a) {
    auto g = grad.data();
    auto y = output.data();
    switch (a) {
    case Activation::relu:
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (y[i] <= 0.0) {
                g[i] = 0.0;
            }
        }
        break;
    case Activation::sigmoid:
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] *= y[i] * (1.0 - y[i]);
        }
        break;
    case Activation::linear:
        break;
    }
}

} // namespace

std::string_view to_string(Activation a) noexcept {
    switch (a) {
    case Activation::relu:
        return "relu";
    case Activation::sigmoid:
        return "sigmoid";
    case Activation::linear:
        break;
    }
    return "linear";
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) {
        throw ShapeError("MlpModel: at least one layer is required");
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        if (l.bias.rows() != 1 || l.bias.cols() != l.weights.cols()) {
            throw ShapeError("MlpModel: layer " + std::to_string(i) + " bias " + l.bias.shape_string() +
                             " does not match weights " + l.weights.shape_string());
        }
        if (i > 0 && layers_[i - 1].weights.cols() != l.weights.rows()) {
            throw ShapeError("MlpModel: layer " + std::to_string(i) + " expects " +
                             std::to_string(l.weights.rows()) + " inputs but previous layer emits " +
                             std::to_string(layers_[i - 1].weights.cols()));
        }
    }
}

MlpModel MlpModel::create(std::size_t input_dim, std::span<const LayerSpec> specs, Rng& rng) {
    std::vector<DenseLayer> layers;
    std::size_t fan_in = input_dim;
    for (const auto& spec : specs) {
        if (fan_in == 0 || spec.width == 0) {
            throw ShapeError("MlpModel::create: layer widths must be positive");
        }
        layers.push_back(DenseLayer{xavier_uniform(fan_in, spec.width, rng), Matrix(1, spec.width), spec.activation});
        fan_in = spec.width;
    }
    return MlpModel(std::move(layers));
}

std::size_t MlpModel::input_dim() const noexcept {
    return layers_.empty() ? 0 : layers_.front().weights.rows();
}

std::size_t MlpModel::output_dim() const noexcept {
    return layers_.empty() ? 0 : layers_.back().weights.cols();
}

std::size_t MlpModel::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) {
        n += l.weights.size() + l.bias.size();
    }
    return n;
}

Matrix MlpModel::forward(const Matrix& inputs) const {
    if (inputs.cols() != input_dim()) {
        throw ShapeError("MlpModel::forward: input has " + std::to_string(inputs.cols()) +
                         " columns, model expects " + std::to_string(input_dim()));
    }
    Matrix x = inputs;
    for (const auto& l : layers_) {
        x = activate(add_row_vector(matmul(x, l.weights), l.bias), l.activation);
    }
    return x;
}

ForwardTrace MlpModel::forward_trace(const Matrix& inputs) const {
    if (inputs.cols() != input_dim()) {
        throw ShapeError("MlpModel::forward_trace: input has " + std::to_string(inputs.cols()) +
                         " columns, model expects " + std::to_string(input_dim()));
    }
    ForwardTrace trace;
    trace.outputs.reserve(layers_.size() + 1);
    trace.outputs.push_back(inputs);
    for (const auto& l : layers_) {
        trace.outputs.push_back(activate(add_row_vector(matmul(trace.outputs.back(), l.weights), l.bias), l.activation));
    }
    return trace;
}

MlpGradients MlpModel::backward(const ForwardTrace& trace, const Matrix& output_grad, Matrix* input_grad) const {
    if (trace.outputs.size() != layers_.size() + 1) {
        throw ShapeError("MlpModel::backward: trace does not match model depth");
    }
    const Matrix& out = trace.result();
    if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
        throw ShapeError("MlpModel::backward: output gradient " + output_grad.shape_string() +
                         " does not match output " + out.shape_string());
    }
    MlpGradients grads;
    grads.weights.resize(layers_.size());
    grads.biases.resize(layers_.size());

    Matrix delta = output_grad;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto& layer = layers_[li];
        scale_by_derivative(delta, trace.outputs[li + 1], layer.activation);
        grads.weights[li] = matmul_at_b(trace.outputs[li], delta);
        grads.biases[li] = column_sums(delta);
        if (li > 0 || input_grad != nullptr) {
            delta = matmul_a_bt(delta, layer.weights);
        }
    }
    if (input_grad != nullptr) {
        *input_grad = std::move(delta);
    }
    return grads;
}

void MlpModel::apply_gradients(const MlpGradients& grads, double learning_rate) {
    if (grads.weights.size() != layers_.size() || grads.biases.size() != layers_.size()) {
        throw ShapeError("MlpModel::apply_gradients: gradient depth does not match model");
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        apply_sgd(layers_[i].weights, grads.weights[i], learning_rate);
        apply_sgd(layers_[i].bias, grads.biases[i], learning_rate);
    }
}

void accumulate(MlpGradients& into, const MlpGradients& other) {
    if (into.weights.size() != other.weights.size() || into.biases.size() != other.biases.size()) {
        throw ShapeError("accumulate: gradient layouts differ");
    }
    for (std::size_t i = 0; i < into.weights.size(); ++i) {
        into.weights[i] = add(into.weights[i], other.weights[i]);
        into.biases[i] = add(into.biases[i], other.biases[i]);
    }
}

std::string serialize_model(const MlpModel& model) {
    std::string out(kModelMagic);
    binio::put_le<std::uint32_t>(out, kModelVersion);
    binio::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers().size()));
    for (const auto& l : model.layers()) {
        binio::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.weights.rows()));
        binio::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.weights.cols()));
        binio::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(l.activation));
        for (double w : l.weights.data()) {
            binio::put_f64(out, w);
        }
        for (double b : l.bias.data()) {
            binio::put_f64(out, b);
        }
    }
    return out;
}

MlpModel deserialize_model(std::string_view bytes) {
    binio::Reader in(bytes);
    if (in.get_bytes(kModelMagic.size(), 0) != kModelMagic) {
        throw ParseError("model: bad magic", 0);
    }
    const auto version = in.get_le<std::uint32_t>(0);
    if (version != kModelVersion) {
        throw ParseError("model: unsupported version " + std::to_string(version), 0);
    }
    const auto count = in.get_le<std::uint32_t>(0);
    std::vector<DenseLayer> layers;
    for (std::uint32_t li = 0; li < count; ++li) {
        const std::size_t record = li + 1;
        const auto fan_in = in.get_le<std::uint32_t>(record);
        const auto fan_out = in.get_le<std::uint32_t>(record);
        const auto act = in.get_le<std::uint8_t>(record);
        if (act > static_cast<std::uint8_t>(Activation::sigmoid)) {
            throw ParseError("model: unknown activation tag " + std::to_string(act), record);
        }
        if (static_cast<std::uint64_t>(fan_in) * fan_out * 8 > in.remaining()) {
            throw ParseError("model: layer larger than remaining data", record);
        }
        DenseLayer layer{Matrix(fan_in, fan_out), Matrix(1, fan_out), static_cast<Activation>(act)};
        for (double& w : layer.weights.data()) {
            w = in.get_f64(record);
        }
        for (double& b : layer.bias.data()) {
            b = in.get_f64(record);
        }
        layers.push_back(std::move(layer));
    }
    if (!in.at_end()) {
        throw ParseError("model: trailing bytes after last layer", count + 1);
    }
    return MlpModel(std::move(layers));
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    binio::write_file(path, serialize_model(model));
}

MlpModel load_model(const std::filesystem::path& path) {
    return deserialize_model(binio::read_file(path));
}

} // namespace agnet
