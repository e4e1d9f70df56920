// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "agnet/config.hpp"
#include "agnet/errors.hpp"

#include <doctest.h>

using namespace agnet;

TEST_CASE("default training settings") {
    const PipelineConfig c;
    CHECK(c.weights.lambda == 1.0);
    CHECK(c.weights.eta == 1.0);
    CHECK(c.a2h_schedule.batch_size == 32);
    CHECK(c.a2h_schedule.initial_lr == 1e-3);
    CHECK(c.a2h_schedule.per_iteration_decay == 1e-4);
    CHECK(c.code_length == 64);
    CHECK(c.empty_ball_policy == EmptyBallPolicy::exclude);
    CHECK_FALSE(c.training_cap.has_value());
    CHECK(c.ablation_d == std::vector<std::size_t>{10, 20, 30, 40, 50, 60, 70, 80});
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("parsing typed keys with comments") {
    const PipelineConfig c = parse_config("# run settings\n"
                                          "seed = 42\n"
                                          "code_length = 16   # shorter codes\n"
                                          "\n"
                                          "lambda = 0.5\n"
                                          "empty_ball_policy = zero\n"
                                          "training_cap = 100\n"
                                          "v2a_hidden = 64,32\n"
                                          "grad_q_enabled = false\n"
                                          "synthetic.noise_sigma = 0\n");
    CHECK(c.seed == 42);
    CHECK(c.code_length == 16);
    CHECK(c.weights.lambda == 0.5);
    CHECK(c.empty_ball_policy == EmptyBallPolicy::zero);
    CHECK(c.training_cap == std::optional<std::size_t>(100));
    CHECK(c.v2a_hidden == std::vector<std::size_t>{64, 32});
    CHECK_FALSE(c.grad_q_enabled);
    CHECK(c.synthetic.noise_sigma == 0.0);
}

TEST_CASE("unknown and duplicate keys are rejected with the line number") {
    try {
        (void)parse_config("seed = 1\nbogus = 2\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.record() == 2);
    }
    CHECK_THROWS_AS((void)parse_config("seed = 1\nseed = 2\n"), ParseError);
    CHECK_THROWS_AS((void)parse_config("seed 1\n"), ParseError);
    CHECK_THROWS_AS((void)parse_config("seed = -1\n"), ValidationError);
    CHECK_THROWS_AS((void)parse_config("lambda = abc\n"), ValidationError);
}

TEST_CASE("code length is restricted unless overridden") {
    PipelineConfig c;
    c.code_length = 12;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.allow_any_code_length = true;
    CHECK_NOTHROW(c.validate());
    c.code_length = 4097;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    for (std::size_t len : kPaperCodeLengths) {
        PipelineConfig p;
        p.code_length = len;
        CHECK_NOTHROW(p.validate());
    }
}

TEST_CASE("invalid values are caught by validate") {
    PipelineConfig c;
    c.synthetic.attribute_dim = 1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    PipelineConfig w;
    w.weights.lambda = -1.0;
    CHECK_THROWS_AS(w.validate(), ValidationError);
}

TEST_CASE("canonical form round-trips and drives the hash") {
    PipelineConfig c;
    c.seed = 9;
    c.code_length = 32;
    const PipelineConfig back = parse_config(c.canonical());
    CHECK(back.canonical() == c.canonical());
    CHECK(back.hash() == c.hash());
    PipelineConfig other = c;
    other.seed = 10;
    CHECK(other.hash() != c.hash());
}

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
