// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "agnet/errors.hpp"
#include "agnet/retrieval.hpp"
#include "agnet/rng.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <array>
#include <cstdint>

using namespace agnet;

namespace {

CodeMatrix four_bit(std::initializer_list<std::uint64_t> words) {
    CodeMatrix m(4);
    Label l = 1;
    for (std::uint64_t w : words) {
        const std::array<std::uint64_t, 1> one{w};
        m.push_back(one, l++);
    }
    return m;
}

} // namespace

TEST_CASE("hamming distance of two 4-bit codes") {
    const std::array<std::uint64_t, 1> a{0b1010};
    const std::array<std::uint64_t, 1> b{0b0110};
    CHECK(hamming(a, b) == 2);
    const std::array<std::uint64_t, 2> c{1, 2};
    CHECK_THROWS_AS((void)hamming(a, c), ShapeError);
}

TEST_CASE("code length bounds and padding bits") {
    CHECK_THROWS_AS(CodeMatrix(0), ValidationError);
    CHECK_THROWS_AS(CodeMatrix(4097), ValidationError);
    CodeMatrix m(4);
    const std::array<std::uint64_t, 1> padded{0b10000};
    CHECK_THROWS_AS(m.push_back(padded, 1), ValidationError);
    CodeMatrix wide(65);
    CHECK(wide.words_per_code() == 2);
    const std::array<std::uint64_t, 1> short_code{0};
    CHECK_THROWS_AS(wide.push_back(short_code, 1), ValidationError);
}

TEST_CASE("bits are stored little-endian within words") {
    CodeMatrix m(70);
    bool bits[70] = {};
    bits[0] = true;
    bits[65] = true;
    m.push_back_bits(bits, 1);
    CHECK(m.code(0)[0] == 1U);
    CHECK(m.code(0)[1] == 2U);
    CHECK(m.bit(0, 65));
    CHECK_FALSE(m.bit(0, 64));
}

TEST_CASE("ranking orders by distance then id") {
    const CodeMatrix db = four_bit({0b1111, 0b0000, 0b0001, 0b1000, 0b0000});
    const std::array<std::uint64_t, 1> q{0b0000};
    const RankedList r = rank(q, db);
    const RankedList expected{{1, 0}, {4, 0}, {2, 1}, {3, 1}, {0, 4}};
    CHECK(r == expected);
    CHECK(distances(q, db) == std::vector<std::size_t>{4, 0, 1, 1, 0});
}

TEST_CASE("radius search") {
    const CodeMatrix db = four_bit({0b1111, 0b0000, 0b0011, 0b0111, 0b0001});
    const std::array<std::uint64_t, 1> q{0b0000};
    CHECK(within_radius(q, db, 0) == std::vector<std::size_t>{1});
    CHECK(within_radius(q, db, 2) == std::vector<std::size_t>{1, 2, 4});
    CHECK(within_radius(q, db, 4).size() == 5);
}

TEST_CASE("rank and hamming agree with the per-bit oracle") {
    Rng rng(77);
    for (std::size_t c : {1, 8, 63, 64, 65, 130}) {
        const CodeMatrix queries = oracle::random_code_matrix(3, c, 2, rng);
        const CodeMatrix db = oracle::random_code_matrix(40, c, 2, rng);
        for (std::size_t q = 0; q < queries.size(); ++q) {
            for (std::size_t j = 0; j < db.size(); ++j) {
                REQUIRE(hamming(queries.code(q), db.code(j)) == oracle::hamming_by_bits(queries, q, db, j));
            }
            CHECK(rank(queries.code(q), db) == oracle::rank_by_sort(queries, q, db));
        }
    }
}

TEST_CASE("code files round-trip and reject corruption") {
    Rng rng(3);
    const CodeMatrix codes = oracle::random_code_matrix(10, 70, 4, rng);
    const std::string bytes = serialize_codes(codes);
    CHECK(bytes.substr(0, 4) == "AGH1");
    CHECK(bytes.size() == 4 + 4 + 8 + 10 * (2 * 8 + 4));
    CHECK(deserialize_codes(bytes) == codes);
    CHECK_THROWS_AS((void)deserialize_codes(bytes.substr(0, bytes.size() - 1)), ParseError);
    CHECK_THROWS_AS((void)deserialize_codes("XXXX" + bytes.substr(4)), ParseError);
    CHECK_THROWS_AS((void)deserialize_codes(bytes + "x"), ParseError);
}

TEST_CASE("gather keeps codes and labels together") {
    const CodeMatrix db = four_bit({1, 2, 3});
    const std::vector<std::size_t> idx{2, 0};
    const CodeMatrix g = db.gather(idx);
    CHECK(g.size() == 2);
    CHECK(g.code(0)[0] == 3U);
    CHECK(g.label(1) == 1U);
}
