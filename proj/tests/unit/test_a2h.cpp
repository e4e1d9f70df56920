// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "agnet/a2h.hpp"
#include "agnet/attribute_nets.hpp"
#include "agnet/dataset.hpp"
#include "agnet/errors.hpp"
#include "agnet/rng.hpp"
#include "agnet/similarity.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace agnet;

namespace {

struct Fixture {
    Matrix p, q, b, s_cat, s_att;
};

Fixture random_fixture(Rng& rng, std::size_t m, std::size_t c, std::size_t d) {
    std::vector<Label> labels(m);
    Matrix attrs(m, d);
    for (std::size_t i = 0; i < m; ++i) {
        labels[i] = static_cast<Label>(1 + rng.below(3));
        attrs(i, rng.below(d)) = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            if (rng.bernoulli(0.3)) {
                attrs(i, k) = 1.0;
            }
        }
    }
    const SimilarityPair s = make_similarity(attrs, labels);
    Fixture f{oracle::random_matrix(c, m, rng, -2, 2), oracle::random_matrix(c, m, rng, -2, 2), {}, s.s_cat,
              s.s_att};
    f.b = binarize(f.p);
    return f;
}

} // namespace

TEST_CASE("theta is half the inner product") {
    const std::vector<double> p{1, 2};
    const std::vector<double> q{3, 4};
    CHECK(theta_pair(p, q) == 5.5);
}

TEST_CASE("category loss of one similar pair at theta 0 is ln 2") {
    const Matrix zero(4, 1);
    CHECK(loss_cs(zero, zero, Matrix{{1}}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(loss_cs(zero, zero, Matrix{{0}}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("attribute loss of an all-zero batch is M^2 / 2") {
    for (std::size_t m : {1, 3, 8}) {
        const Matrix zero(5, m);
        const Matrix s(m, m, 0.3);
        CHECK(loss_as(zero, s) == doctest::Approx(0.5 * static_cast<double>(m * m)).epsilon(1e-15));
    }
}

TEST_CASE("regularizer values") {
    const Matrix balanced{{1, -1}, {-1, 1}};
    CHECK(loss_reg(balanced, binarize(balanced)) == 0.0);
    // (2 − 1)² + (−1 + 1)² = 1, plus (2 − 1)² = 1 from the bit sum.
    const Matrix p{{2, -1}};
    CHECK(loss_reg(p, binarize(p)) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("regularizer gradient by hand") {
    // 2(P − B) = [2, 0]; balance 2·(2 − 1) = 2 in every column.
    const Matrix p{{2, -1}};
    const Matrix q(1, 2);
    const std::vector<Label> labels{1, 2};
    const SimilarityPair s = make_similarity(Matrix{{1, 0}, {0, 1}}, labels);
    const Matrix g = grad_P(p, q, binarize(p), s.s_cat, s.s_att, LossWeights{0.0, 1.0});
    CHECK(g(0, 0) == doctest::Approx(4.0));
    CHECK(g(0, 1) == doctest::Approx(2.0));
    const Matrix g2 = grad_P(p, q, binarize(p), s.s_cat, s.s_att, LossWeights{0.0, 0.5});
    CHECK(g2(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("binarize maps zero to +1") {
    CHECK(binarize(Matrix{{-0.1, 0.0, 2.0}}) == Matrix{{-1, 1, 1}});
}

TEST_CASE("loss_terms combine with the weights") {
    Rng rng(12);
    const Fixture f = random_fixture(rng, 4, 3, 5);
    const LossWeights w{0.7, 2.0};
    const LossTerms t = loss_terms(f.p, f.q, f.b, f.s_cat, f.s_att, w);
    CHECK(t.cs == doctest::Approx(loss_cs(f.p, f.q, f.s_cat)));
    CHECK(t.as == doctest::Approx(loss_as(f.p, f.s_att)));
    CHECK(t.reg == doctest::Approx(loss_reg(f.p, f.b)));
    CHECK(t.total == doctest::Approx(t.cs + 0.7 * t.as + 2.0 * t.reg));
    CHECK(loss_total(f.p, f.q, f.b, f.s_cat, f.s_att, w) == doctest::Approx(t.total));
}

TEST_CASE("analytic P and Q gradients match central differences") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 2 + rng.below(5);
        const std::size_t c = 2 + rng.below(7);
        const std::size_t d = 3 + rng.below(8);
        const Fixture f = random_fixture(rng, m, c, d);
        const LossWeights w{1.0, 1.0};
        const Matrix fd_p = finite_diff_gradient(
            [&](const Matrix& p) { return loss_total(p, f.q, f.b, f.s_cat, f.s_att, w); }, f.p, 1e-5);
        const Matrix fd_q = finite_diff_gradient(
            [&](const Matrix& q) { return loss_total(f.p, q, f.b, f.s_cat, f.s_att, w); }, f.q, 1e-5);
        CHECK(oracle::relative_error(grad_P(f.p, f.q, f.b, f.s_cat, f.s_att, w), fd_p) < 1e-6);
        CHECK(oracle::relative_error(grad_Q(f.p, f.q, f.s_cat), fd_q) < 1e-6);
    }
}

TEST_CASE("hash net layout and code packing") {
    Rng rng(5);
    const A2HModel model = make_a2h(6, 16, kA2HHidden, rng);
    CHECK(model.code_length() == 16);
    CHECK(model.attribute_dim() == 6);
    REQUIRE(model.net.layers().size() == 3);
    CHECK(model.net.layers()[0].activation == Activation::relu);
    CHECK(model.net.layers()[1].activation == Activation::sigmoid);
    CHECK(model.net.layers()[2].activation == Activation::linear);
    CHECK_THROWS_AS((void)as_a2h(make_attribute_net(6, std::vector<std::size_t>{4}, 3, rng)), ValidationError);

    const std::vector<Label> labels{3, 4};
    const CodeMatrix codes = pack_signs(Matrix{{0.0, -1.0, 2.0}, {-0.5, -0.5, 0.0}}, labels);
    CHECK(codes.code(0)[0] == 0b101U);
    CHECK(codes.code(1)[0] == 0b100U);
    CHECK(codes.labels() == labels);
}

TEST_CASE("iterations per epoch") {
    CHECK(a2h_iterations_per_epoch(100, 32) == 3);
    CHECK(a2h_iterations_per_epoch(64, 32) == 2);
    CHECK(a2h_iterations_per_epoch(10, 32) == 1);
}

TEST_CASE("training separates classes across modalities on noiseless attributes") {
    // Near-perfect attribute predictions stand in for trained attribute nets.
    SyntheticSpec spec;
    spec.seen_classes = 6;
    spec.unseen_classes = 1;
    spec.attribute_dim = 16;
    spec.per_class = 20;
    spec.noise_sigma = 0.0;
    Rng rng(31);
    const DataSet ds = generate_synthetic(spec, rng);
    const auto seen = ds.seen_indices();
    Matrix soft = ds.attributes_of(seen);
    for (double& v : soft.data()) {
        v = v > 0.5 ? 0.95 : 0.05;
    }
    const AttributePrediction pred(soft);
    const auto labels = ds.labels_of(seen);

    const A2HModel init = make_a2h(ds.attribute_dim(), 32, kA2HHidden, rng);
    const A2HTrainResult r = train_a2h(init, pred, pred, labels, ds.attribute_table(), SgdSchedule{},
                                       LossWeights{}, 600, rng);
    REQUIRE(r.trace.size() == 600);
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        first += r.trace[i].loss.total;
        last += r.trace[r.trace.size() - 1 - i].loss.total;
    }
    CHECK(last < first);

    const CodeMatrix codes = encode(r.model, pred, labels);
    double intra = 0.0;
    double inter = 0.0;
    std::size_t n_intra = 0;
    std::size_t n_inter = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        for (std::size_t j = 0; j < codes.size(); ++j) {
            const double h = static_cast<double>(hamming(codes.code(i), codes.code(j)));
            if (codes.label(i) == codes.label(j)) {
                intra += h;
                ++n_intra;
            } else {
                inter += h;
                ++n_inter;
            }
        }
    }
    CHECK(intra / static_cast<double>(n_intra) < inter / static_cast<double>(n_inter));
}

TEST_CASE("zero iterations leave the model untouched") {
    Rng rng(2);
    const A2HModel init = make_a2h(3, 8, kA2HHidden, rng);
    const AttributePrediction pred(Matrix{{0.9, 0.1, 0.2}});
    const std::vector<Label> labels{1};
    const A2HTrainResult r =
        train_a2h(init, pred, pred, labels, Matrix{{1, 0, 0}}, SgdSchedule{}, LossWeights{}, 0, rng);
    CHECK(r.model == init);
    CHECK(r.trace.empty());
}
