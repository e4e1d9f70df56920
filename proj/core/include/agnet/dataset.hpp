// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace agnet {

class Rng;

/// Category id; valid ids run from 1 to s + u.
using Label = std::uint32_t;

/// Which side of the network an input vector feeds.
enum class Modality { visual, text };

/// Disjoint seen/unseen partition of the category ids.
struct ZeroShotSplit {
    std::vector<Label> seen;
    std::vector<Label> unseen;

    [[nodiscard]] bool is_seen(Label label) const;
    [[nodiscard]] bool is_unseen(Label label) const;
    [[nodiscard]] std::size_t num_classes() const { return seen.size() + unseen.size(); }

    bool operator==(const ZeroShotSplit&) const = default;
};

/// Read-only view of one instance.
struct Instance {
    std::uint64_t id;
    Label label;
    std::span<const double> visual;
    std::span<const double> text;
    std::span<const double> attributes;
};

/// A validated zero-shot dataset.
///
/// Instance i owns row i of `visual` and `text`; its attribute vector is row
/// `label - 1` of `attribute_table`, so per-instance attributes are shared by
/// construction across a class.
class DataSet {
public:
    DataSet() = default;
    /// Validates every invariant; throws ValidationError naming the offender.
    DataSet(std::vector<std::uint64_t> ids, std::vector<Label> labels, Matrix visual, Matrix text,
            Matrix attribute_table, ZeroShotSplit split);

    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] std::size_t visual_dim() const noexcept { return visual_.cols(); }
    [[nodiscard]] std::size_t text_dim() const noexcept { return text_.cols(); }
    [[nodiscard]] std::size_t attribute_dim() const noexcept { return attribute_table_.cols(); }
    [[nodiscard]] std::size_t num_classes() const noexcept { return attribute_table_.rows(); }

    [[nodiscard]] Instance instance(std::size_t i) const;

    [[nodiscard]] const std::vector<std::uint64_t>& ids() const noexcept { return ids_; }
    [[nodiscard]] const std::vector<Label>& labels() const noexcept { return labels_; }
    [[nodiscard]] const Matrix& visual() const noexcept { return visual_; }
    [[nodiscard]] const Matrix& text() const noexcept { return text_; }
    [[nodiscard]] const Matrix& attribute_table() const noexcept { return attribute_table_; }
    [[nodiscard]] const ZeroShotSplit& split() const noexcept { return split_; }

    [[nodiscard]] std::span<const double> class_attributes(Label label) const;
    [[nodiscard]] const Matrix& features(Modality modality) const noexcept {
        return modality == Modality::visual ? visual_ : text_;
    }

    /// n × d matrix of the attribute vectors of the given instances.
    [[nodiscard]] Matrix attributes_of(std::span<const std::size_t> indices) const;
    [[nodiscard]] std::vector<Label> labels_of(std::span<const std::size_t> indices) const;

    /// Indices of seen-class (resp. unseen-class) instances, ascending.
    [[nodiscard]] std::vector<std::size_t> seen_indices() const;
    [[nodiscard]] std::vector<std::size_t> unseen_indices() const;
    /// Index of the first instance of each given class.
    [[nodiscard]] std::vector<std::size_t> class_representatives(std::span<const Label> classes) const;

    /// Copy keeping only the given attribute columns.
    [[nodiscard]] DataSet with_attribute_columns(std::span<const std::size_t> columns) const;

    bool operator==(const DataSet&) const = default;

private:
    void validate() const;

    std::vector<std::uint64_t> ids_;
    std::vector<Label> labels_;
    Matrix visual_;
    Matrix text_;
    Matrix attribute_table_;
    ZeroShotSplit split_;
};

struct DatasetPaths {
    std::filesystem::path features;
    std::filesystem::path texts;
    std::filesystem::path attributes;
    std::filesystem::path split;

    /// visual.csv, text.csv, attributes.csv and split.txt inside `dir`.
    static DatasetPaths in_directory(const std::filesystem::path& dir);
};

[[nodiscard]] DataSet load_dataset(const DatasetPaths& paths);
void save_dataset(const DataSet& ds, const DatasetPaths& paths);

struct SyntheticSpec {
    std::size_t seen_classes = 8;
    std::size_t unseen_classes = 4;
    std::size_t attribute_dim = 32;
    std::size_t visual_dim = 256;
    std::size_t text_dim = 256;
    std::size_t per_class = 50;
    double noise_sigma = 0.5;
    double attribute_density = 0.3;

    void validate() const;
};

/// Desk-scale dataset with a known generative model: class attribute
/// vectors are i.i.d. Bernoulli(attribute_density) rows without duplicates,
/// visual = W_v·a + N(0, noise_sigma²) per instance and text = W_t·a per class.
/// Classes 1..s are seen and s+1..s+u unseen.
[[nodiscard]] DataSet generate_synthetic(const SyntheticSpec& spec, Rng& rng);

/// Image-based retrieval: queries from the unseen side, retrieval set is the
/// remaining unseen instances plus every seen instance. Both lists ascending.
struct IbirProtocol {
    std::vector<std::size_t> queries;
    std::vector<std::size_t> retrieval;
};

[[nodiscard]] IbirProtocol make_ibir_protocol(const DataSet& ds, std::size_t n_query, Rng& rng);

/// Text-based retrieval: one text query per unseen class against every
/// unseen instance.
struct TbirProtocol {
    std::vector<Label> query_labels;
    /// Instance index whose text vector represents each query class.
    std::vector<std::size_t> query_sources;
    std::vector<std::size_t> retrieval;
};

[[nodiscard]] TbirProtocol make_tbir_protocol(const DataSet& ds);

/// Seen-class training indices, optionally capped to a random subset of
/// `cap` instances (returned ascending).
[[nodiscard]] std::vector<std::size_t> training_indices(const DataSet& ds, std::optional<std::size_t> cap,
                                                        Rng& rng);

} // namespace agnet
