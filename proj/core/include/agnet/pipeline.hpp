// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/a2h.hpp"
#include "agnet/attribute_nets.hpp"
#include "agnet/config.hpp"
#include "agnet/dataset.hpp"
#include "agnet/evaluation.hpp"
#include "agnet/mlp.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace agnet {

/// Named, order-independent random streams derived from the config seed.
enum class Stream : std::uint64_t {
    dataset = 1,
    training_subset,
    v2a_init,
    t2a_init,
    a2h_init,
    v2a_train,
    t2a_train,
    a2h_train,
    ibir_protocol,
    baseline,
    ablation,
};

/// Seed for `stream` under the master `seed` (SplitMix64 mix of both).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t salt = 0);

struct TrainedModels {
    MlpModel v2a;
    MlpModel t2a;
    A2HModel a2h;
};

struct TrainingRun {
    TrainedModels models;
    std::vector<std::size_t> train_ids;
    AttributeTrainResult v2a;
    AttributeTrainResult t2a;
    std::vector<A2HIteration> a2h_trace;
};

/// Two-step training on seen-class instances only: V2A and T2A on the
/// cross-entropy loss, then the shared hash net on their predictions.
[[nodiscard]] TrainingRun train_pipeline(const DataSet& ds, const PipelineConfig& config);

/// Predicted attributes of the given instances for one modality.
[[nodiscard]] AttributePrediction predict(const TrainedModels& models, const DataSet& ds, Modality modality,
                                          std::span<const std::size_t> indices);

/// Codes of the given instances for one modality.
[[nodiscard]] CodeMatrix encode_instances(const TrainedModels& models, const DataSet& ds, Modality modality,
                                          std::span<const std::size_t> indices);

struct RetrievalResult {
    EvalReport report;
    /// Mean mAP of `baseline_draws` random-code runs on the same protocol.
    double random_baseline_map = 0.0;
};

[[nodiscard]] RetrievalResult run_tbir(const DataSet& ds, const TrainedModels& models, const PipelineConfig& config);
[[nodiscard]] RetrievalResult run_ibir(const DataSet& ds, const TrainedModels& models, const PipelineConfig& config);

/// Number of IBIR queries the config asks for on this dataset.
[[nodiscard]] std::size_t ibir_query_count(const DataSet& ds, const PipelineConfig& config);

struct PedRow {
    Modality modality;
    std::string split;
    double ped;
};

/// PED of both attribute nets on seen and unseen instances.
[[nodiscard]] std::vector<PedRow> run_ped(const DataSet& ds, const TrainedModels& models);

/// Unseen-class text codes against unseen images.
[[nodiscard]] ConfusionMatrix run_confusion(const DataSet& ds, const TrainedModels& models);

struct AblationRow {
    std::size_t attribute_count;
    std::vector<double> trial_maps;
    double mean_map;
};

/// For each d, keeps d attribute columns drawn uniformly without replacement
/// (fresh per trial), retrains the whole pipeline and records TBIR mAP.
/// Draws whose column subset leaves some class without a positive attribute
/// are redrawn, up to a bounded number of attempts.
[[nodiscard]] std::vector<AblationRow> attribute_ablation(const DataSet& ds, std::span<const std::size_t> d_values,
                                                          std::size_t trials, const PipelineConfig& config);

// File-level commands. Each validates its inputs before writing anything and
// records every file it writes in `<dir>/manifest.txt`.

enum class EncodeSelection { all, seen, unseen };
enum class EvalTask { tbir, ibir, ped, confusion, ablate };

[[nodiscard]] EncodeSelection parse_selection(std::string_view name);
[[nodiscard]] EvalTask parse_task(std::string_view name);
[[nodiscard]] Modality parse_modality(std::string_view name);

/// Writes the synthetic dataset described by `config` into dataset_dir().
void cmd_gen_data(const PipelineConfig& config);

/// Trains from dataset_dir() and writes v2a.model, t2a.model, a2h.model and
/// the three loss traces into out_dir.
void cmd_train(const PipelineConfig& config);

/// Writes `codes_<modality>_<selection>.agh` plus a matching embeddings CSV
/// and returns the code file path. Text codes hold one code per class.
std::filesystem::path cmd_encode(const PipelineConfig& config, Modality modality, EncodeSelection selection);

/// Runs one evaluation task and returns the console summary.
std::string cmd_eval(const PipelineConfig& config, EvalTask task);

[[nodiscard]] TrainedModels load_models(const std::filesystem::path& dir);

} // namespace agnet
