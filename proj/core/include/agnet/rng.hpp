// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace agnet {

/// Seeded pseudo-random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distributions are implemented here rather than taken from
/// <random> because the standard leaves their algorithms unspecified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal (Marsaglia polar method).
    double normal();
    bool bernoulli(double p);
    /// Uniform integer in [0, bound); bound must be positive.
    std::size_t below(std::size_t bound);

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(values[i - 1], values[j]);
        }
    }

    /// `count` distinct indices from [0, population), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count);

    /// Independent child stream derived from this generator's next output.
    Rng fork();

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace agnet
