// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/a2h.hpp"
#include "agnet/dataset.hpp"
#include "agnet/evaluation.hpp"
#include "agnet/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agnet {

/// Everything a pipeline run depends on. Hash-net defaults: lambda = eta = 1,
/// batch 32, learning rate 1e-3 decayed by 0.01% per iteration, 64-bit codes.
struct PipelineConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "agnet_out";
    /// Dataset directory; empty means `<out_dir>/data`.
    std::filesystem::path data_dir;

    SyntheticSpec synthetic;

    std::size_t code_length = 64;
    bool allow_any_code_length = false;

    std::vector<std::size_t> v2a_hidden{1024, 512};
    std::vector<std::size_t> t2a_hidden{1000};
    std::vector<std::size_t> a2h_hidden{128, 128};

    LossWeights weights;
    SgdSchedule a2h_schedule;
    SgdSchedule attribute_schedule{0.01, 1e-4, 32};
    std::size_t attribute_epochs = 10;
    std::size_t a2h_epochs = 20;

    bool grad_q_enabled = true;
    LossNormalization a2h_normalization = LossNormalization::per_pair;
    EmptyBallPolicy empty_ball_policy = EmptyBallPolicy::exclude;
    /// Cap on the number of seen training instances; nullopt uses all.
    std::optional<std::size_t> training_cap;
    /// Image queries for IBIR; 0 picks min(1000, #unseen / 4).
    std::size_t ibir_queries = 0;
    /// Random-code draws averaged into the baseline mAP.
    std::size_t baseline_draws = 10;

    std::vector<std::size_t> ablation_d{10, 20, 30, 40, 50, 60, 70, 80};
    std::size_t ablation_trials = 5;

    [[nodiscard]] std::filesystem::path dataset_dir() const { return data_dir.empty() ? out_dir / "data" : data_dir; }

    /// Throws ValidationError on out-of-range values.
    void validate() const;

    /// Sets one key from its text form; throws ValidationError for unknown
    /// keys or badly typed values.
    void set(std::string_view key, std::string_view value);

    /// `key = value` lines for every key, in a fixed order.
    [[nodiscard]] std::string canonical() const;
    /// FNV-1a 64 of canonical().
    [[nodiscard]] std::uint64_t hash() const;
};

inline constexpr std::size_t kPaperCodeLengths[] = {8, 16, 32, 48, 64};

/// Parses `key = value` lines; '#' starts a comment. Duplicate and unknown
/// keys are errors.
[[nodiscard]] PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
[[nodiscard]] PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);

} // namespace agnet
