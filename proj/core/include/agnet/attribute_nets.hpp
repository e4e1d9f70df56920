// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/dataset.hpp"
#include "agnet/mlp.hpp"
#include "agnet/numerics.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace agnet {

class Rng;

/// Predicted attribute vectors, one row per instance; every entry lies
/// strictly inside (0, 1).
class AttributePrediction {
public:
    AttributePrediction() = default;
    /// Throws ValidationError if any entry is outside (0, 1).
    explicit AttributePrediction(Matrix values);

    [[nodiscard]] const Matrix& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t rows() const noexcept { return values_.rows(); }
    [[nodiscard]] std::size_t cols() const noexcept { return values_.cols(); }

    [[nodiscard]] AttributePrediction gather_rows(std::span<const std::size_t> indices) const {
        return AttributePrediction(values_.gather_rows(indices));
    }

private:
    Matrix values_;
};

/// Default hidden widths: V2A 1024 → 512 → d, T2A 1000 → d.
inline const std::vector<std::size_t> kV2AHidden{1024, 512};
inline const std::vector<std::size_t> kT2AHidden{1000};

/// ReLU hidden layers followed by a sigmoid head of width `attribute_dim`.
[[nodiscard]] MlpModel make_attribute_net(std::size_t input_dim, std::span<const std::size_t> hidden,
                                          std::size_t attribute_dim, Rng& rng);

[[nodiscard]] AttributePrediction predict_attributes(const MlpModel& model, const Matrix& inputs);

/// Log arguments are clamped to [kLogClamp, 1 − kLogClamp].
inline constexpr double kLogClamp = 1e-12;

/// Mean over rows of the summed binary cross-entropy against `truth`.
[[nodiscard]] double attribute_loss(const Matrix& pred, const Matrix& truth);
/// ∂attribute_loss/∂pred.
[[nodiscard]] Matrix attribute_loss_gradient(const Matrix& pred, const Matrix& truth);

struct AttributeEpoch {
    std::size_t epoch;
    double learning_rate;
    double mean_batch_loss;
};

struct AttributeTrainResult {
    MlpModel model;
    std::vector<AttributeEpoch> trace;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::size_t iterations = 0;
};

/// Mini-batch SGD on the cross-entropy loss. Batches are reshuffled every
/// epoch; a short final batch is kept so each epoch visits every row once.
[[nodiscard]] AttributeTrainResult train_attribute_net(MlpModel model, const Matrix& inputs, const Matrix& targets,
                                                       const SgdSchedule& schedule, std::size_t epochs, Rng& rng);

/// Dataset form: trains on `train_ids`, which must all be seen-class
/// instances (ValidationError otherwise).
[[nodiscard]] AttributeTrainResult train_attribute_net(MlpModel model, const DataSet& ds, Modality modality,
                                                       std::span<const std::size_t> train_ids,
                                                       const SgdSchedule& schedule, std::size_t epochs, Rng& rng);

/// CSV `epoch,lr,loss`.
void write_attribute_trace(const std::vector<AttributeEpoch>& trace, const std::filesystem::path& path);

} // namespace agnet
