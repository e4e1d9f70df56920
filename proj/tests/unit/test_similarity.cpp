// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "agnet/errors.hpp"
#include "agnet/similarity.hpp"

#include <doctest.h>

#include <cmath>

using namespace agnet;

TEST_CASE("category similarity is the label-equality indicator") {
    const std::vector<Label> labels{1, 1, 2};
    CHECK(category_similarity(labels) == Matrix{{1, 1, 0}, {1, 1, 0}, {0, 0, 1}});
}

TEST_CASE("attribute similarity subtracts the category indicator") {
    const std::vector<Label> labels{1, 1, 2};
    const Matrix attrs{{1, 0}, {1, 0}, {1, 1}};
    const Matrix s = attribute_similarity(attrs, labels);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(s(0, 0) == 0.0);
    CHECK(s(0, 1) == 0.0);
    CHECK(s(0, 2) == doctest::Approx(r).epsilon(1e-15));
    CHECK(s(2, 0) == doctest::Approx(r).epsilon(1e-15));
    CHECK(s(2, 2) == 0.0);
}

TEST_CASE("orthogonal attributes of different classes give zero") {
    const std::vector<Label> labels{1, 2};
    const Matrix s = attribute_similarity(Matrix{{1, 0, 0}, {0, 1, 1}}, labels);
    CHECK(s == Matrix{{0, 0}, {0, 0}});
}

TEST_CASE("similarity of distinct classes stays in [0, 1) for binary attributes") {
    const std::vector<Label> labels{1, 2, 3};
    const Matrix s = attribute_similarity(Matrix{{1, 1, 0, 1}, {1, 0, 0, 1}, {0, 1, 1, 0}}, labels);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(s(i, j) >= 0.0);
            CHECK(s(i, j) < 1.0);
            CHECK(s(i, j) == s(j, i));
        }
    }
}

TEST_CASE("all-zero attribute rows and shape mismatches are rejected") {
    const std::vector<Label> labels{1, 2};
    CHECK_THROWS_AS((void)attribute_similarity(Matrix{{0, 0}, {1, 0}}, labels), ValidationError);
    CHECK_THROWS_AS((void)attribute_similarity(Matrix{{1, 0}}, labels), ValidationError);
}

TEST_CASE("make_similarity bundles both matrices") {
    const std::vector<Label> labels{2, 1};
    const SimilarityPair p = make_similarity(Matrix{{1, 1}, {1, 0}}, labels);
    CHECK(p.s_cat == Matrix{{1, 0}, {0, 1}});
    CHECK(p.s_att(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));
}
