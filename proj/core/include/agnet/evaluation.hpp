// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/dataset.hpp"
#include "agnet/numerics.hpp"
#include "agnet/retrieval.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agnet {

class Rng;

enum class Protocol { tbir, ibir };

[[nodiscard]] std::string_view to_string(Protocol p) noexcept;

/// What a query whose radius ball is empty contributes to the precision average.
enum class EmptyBallPolicy { exclude, zero };

/// Average of precision@k over the ranks k of relevant items, using the full
/// ranking. `relevant[id]` flags relevance; returns nullopt if nothing in the
/// ranking is relevant.
[[nodiscard]] std::optional<double> average_precision(const RankedList& ranking, const std::vector<bool>& relevant);

/// Set form; ids outside the ranking are ignored.
[[nodiscard]] std::optional<double> average_precision(const RankedList& ranking,
                                                      std::span<const std::size_t> relevant_ids);

struct EvalReport {
    Protocol protocol = Protocol::tbir;
    std::size_t code_length = 0;
    double map_value = 0.0;
    /// nullopt when every query had an empty radius ball (exclude policy).
    std::optional<double> precision_at_r2;
    std::vector<double> per_query_ap;
    /// Queries with no relevant database item; left out of the mean.
    std::size_t skipped_queries = 0;
};

/// mAP with label equality as relevance, plus precision within Hamming
/// radius 2. Throws ValidationError if no query has a relevant item.
[[nodiscard]] EvalReport mean_average_precision(const CodeMatrix& queries, const CodeMatrix& db, Protocol protocol,
                                                EmptyBallPolicy policy = EmptyBallPolicy::exclude);

/// Per-query fraction of same-label items within `radius`, averaged over
/// queries. Queries with an empty ball follow `policy`.
[[nodiscard]] std::optional<double> precision_within_radius(const CodeMatrix& queries, const CodeMatrix& db,
                                                            std::size_t radius,
                                                            EmptyBallPolicy policy = EmptyBallPolicy::exclude);

/// Positive-error distance: Σ A·|A − Â| / Σ A over all entries, i.e. the
/// mean absolute error on positive attribute tags. Throws if `truth` has no 1.
[[nodiscard]] double positive_error_distance(const Matrix& truth, const Matrix& pred);

/// Rows: the class of the text code nearest to each image. Columns: the
/// image's own class. Both indexed like `classes`.
struct ConfusionMatrix {
    std::vector<Label> classes;
    std::vector<std::vector<std::size_t>> counts;

    [[nodiscard]] std::size_t at(std::size_t row, std::size_t col) const { return counts[row][col]; }
    [[nodiscard]] std::size_t column_sum(std::size_t col) const;
};

/// Each image is assigned to its nearest text code (Hamming; ties go to the
/// smaller class id). `text_codes` must hold exactly one code per class.
[[nodiscard]] ConfusionMatrix text_image_confusion(const CodeMatrix& text_codes, const CodeMatrix& image_codes);

/// Uniformly random codes carrying the given labels; the retrieval baseline.
[[nodiscard]] CodeMatrix random_codes(std::span<const Label> labels, std::size_t code_length, Rng& rng);

/// CSV `query,ap` followed by nothing else; summary rows go to write_summary_csv.
void write_per_query_csv(const EvalReport& report, const std::filesystem::path& path);
/// Human-readable one-line summary.
[[nodiscard]] std::string format_report(const EvalReport& report);
/// CSV with a header row of class names and one row per text class.
void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path);
[[nodiscard]] std::string format_confusion(const ConfusionMatrix& cm);

} // namespace agnet
