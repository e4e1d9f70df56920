// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/attribute_nets.hpp"

#include "agnet/errors.hpp"
#include "agnet/rng.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agnet {

namespace {

void require_loss_shapes(const Matrix& pred, const Matrix& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw ShapeError("attribute loss: prediction " + pred.shape_string() + " vs truth " + truth.shape_string());
    }
    if (pred.rows() == 0) {
        throw ValidationError("attribute loss: empty batch");
    }
    for (double a : truth.data()) {
        if (a != 0.0 && a != 1.0) {
            throw ValidationError("attribute loss: ground truth must be binary");
        }
    }
}

double clamp_prob(double p) {
    return std::clamp(p, kLogClamp, 1.0 - kLogClamp);
}

} // namespace

AttributePrediction::AttributePrediction(Matrix values) : values_(std::move(values)) {
    for (double v : values_.data()) {
        if (!(v > 0.0 && v < 1.0)) {
            throw ValidationError("attribute prediction entry " + detail::format_double(v) + " is outside (0, 1)");
        }
    }
}

MlpModel make_attribute_net(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t attribute_dim,
                            Rng& rng) {
    std::vector<LayerSpec> specs;
    for (std::size_t w : hidden) {
        specs.push_back({w, Activation::relu});
    }
    specs.push_back({attribute_dim, Activation::sigmoid});
    return MlpModel::create(input_dim, specs, rng);
}

AttributePrediction predict_attributes(const MlpModel& model, const Matrix& inputs) {
    if (model.layers().empty() || model.layers().back().activation != Activation::sigmoid) {
        throw ValidationError("predict_attributes: attribute nets must end in a sigmoid layer");
    }
    return AttributePrediction(model.forward(inputs));
}

double attribute_loss(const Matrix& pred, const Matrix& truth) {
    require_loss_shapes(pred, truth);
    double total = 0.0;
    auto p = pred.data();
    auto a = truth.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = clamp_prob(p[i]);
        total += a[i] * std::log(q) + (1.0 - a[i]) * std::log(1.0 - q);
    }
    return -total / static_cast<double>(pred.rows());
}

Matrix attribute_loss_gradient(const Matrix& pred, const Matrix& truth) {
    require_loss_shapes(pred, truth);
    Matrix grad(pred.rows(), pred.cols());
    const double inv_n = 1.0 / static_cast<double>(pred.rows());
    auto p = pred.data();
    auto a = truth.data();
    auto g = grad.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = clamp_prob(p[i]);
        g[i] = -inv_n * (a[i] / q - (1.0 - a[i]) / (1.0 - q));
    }
    return grad;
}

AttributeTrainResult train_attribute_net(MlpModel model, const Matrix& inputs, const Matrix& targets,
                                         const SgdSchedule& schedule, std::size_t epochs, Rng& rng) {
    schedule.validate();
    if (inputs.rows() == 0) {
        throw ValidationError("train_attribute_net: empty training set");
    }
    if (inputs.rows() != targets.rows() || targets.cols() != model.output_dim()) {
        throw ShapeError("train_attribute_net: inputs " + inputs.shape_string() + " / targets " +
                         targets.shape_string() + " do not fit a model with output " +
                         std::to_string(model.output_dim()));
    }
    AttributeTrainResult result;
    result.initial_loss = attribute_loss(model.forward(inputs), targets);

    const std::size_t n = inputs.rows();
    const std::size_t m = std::min(schedule.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t iteration = 0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        std::size_t batches = 0;
        const double epoch_lr = schedule.learning_rate(iteration);
        for (std::size_t start = 0; start < n; start += m) {
            const std::size_t stop = std::min(start + m, n);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            const Matrix x = inputs.gather_rows(batch);
            const Matrix a = targets.gather_rows(batch);
            const ForwardTrace trace = model.forward_trace(x);
            const double loss = attribute_loss(trace.result(), a);
            if (!std::isfinite(loss)) {
                throw NumericError("train_attribute_net: non-finite loss at iteration " + std::to_string(iteration));
            }
            loss_sum += loss;
            ++batches;
            const MlpGradients grads = model.backward(trace, attribute_loss_gradient(trace.result(), a));
            model.apply_gradients(grads, schedule.learning_rate(iteration));
            ++iteration;
        }
        result.trace.push_back({epoch + 1, epoch_lr, loss_sum / static_cast<double>(batches)});
    }
    result.iterations = iteration;
    result.final_loss = attribute_loss(model.forward(inputs), targets);
    result.model = std::move(model);
    return result;
}

AttributeTrainResult train_attribute_net(MlpModel model, const DataSet& ds, Modality modality,
                                         std::span<const std::size_t> train_ids, const SgdSchedule& schedule,
                                         std::size_t epochs, Rng& rng) {
    if (train_ids.empty()) {
        throw ValidationError("train_attribute_net: empty training set");
    }
    for (std::size_t i : train_ids) {
        if (i >= ds.size() || !ds.split().is_seen(ds.labels()[i])) {
            throw ValidationError("train_attribute_net: instance index " + std::to_string(i) +
                                  " is not a seen-class instance");
        }
    }
    return train_attribute_net(std::move(model), ds.features(modality).gather_rows(train_ids),
                               ds.attributes_of(train_ids), schedule, epochs, rng);
}

void write_attribute_trace(const std::vector<AttributeEpoch>& trace, const std::filesystem::path& path) {
    std::string out = "epoch,lr,loss\n";
    for (const auto& e : trace) {
        out += std::to_string(e.epoch) + "," + detail::format_double(e.learning_rate) + "," +
               detail::format_double(e.mean_batch_loss) + "\n";
    }
    detail::write_text(path, out);
}

} // namespace agnet
