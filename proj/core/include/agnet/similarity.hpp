// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/dataset.hpp"
#include "agnet/numerics.hpp"

#include <span>

namespace agnet {

/// Category and attribute similarity of one mini-batch.
struct SimilarityPair {
    Matrix s_cat; // 1 iff same label
    Matrix s_att; // cos(a_i, a_j) − s_cat
};

/// n × n indicator of label equality.
[[nodiscard]] Matrix category_similarity(std::span<const Label> labels);

/// cos(a_i, a_j) minus the category indicator. `attrs` is n × d with one row
/// per instance; an all-zero row throws ValidationError.
[[nodiscard]] Matrix attribute_similarity(const Matrix& attrs, std::span<const Label> labels);

[[nodiscard]] SimilarityPair make_similarity(const Matrix& attrs, std::span<const Label> labels);

} // namespace agnet
