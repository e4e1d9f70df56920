// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/similarity.hpp"

#include "agnet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace agnet {

Matrix category_similarity(std::span<const Label> labels) {
    const std::size_t n = labels.size();
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            s(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;
        }
    }
    return s;
}

Matrix attribute_similarity(const Matrix& attrs, std::span<const Label> labels) {
    const std::size_t n = labels.size();
    if (attrs.rows() != n) {
        throw ShapeError("attribute_similarity: " + std::to_string(attrs.rows()) + " attribute rows for " +
                         std::to_string(n) + " labels");
    }
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (double v : attrs.row(i)) {
            sq += v * v;
        }
        norms[i] = std::sqrt(sq);
        if (norms[i] == 0.0) {
            throw ValidationError("attribute_similarity: instance " + std::to_string(i) +
                                  " has an all-zero attribute vector");
        }
    }
    const Matrix dots = matmul_a_bt(attrs, attrs);
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // Identical rows get an exact cosine of 1 so same-class entries are exactly 0.
            const bool identical = std::ranges::equal(attrs.row(i), attrs.row(j));
            const double cosine = identical ? 1.0 : std::clamp(dots(i, j) / (norms[i] * norms[j]), -1.0, 1.0);
            s(i, j) = cosine - (labels[i] == labels[j] ? 1.0 : 0.0);
        }
    }
    return s;
}

SimilarityPair make_similarity(const Matrix& attrs, std::span<const Label> labels) {
    return SimilarityPair{category_similarity(labels), attribute_similarity(attrs, labels)};
}

} // namespace agnet
