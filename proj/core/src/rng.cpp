// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/rng.hpp"

#include "agnet/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace agnet {

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

bool Rng::bernoulli(double p) {
    return uniform() < p;
}

std::size_t Rng::below(std::size_t bound) {
    if (bound == 0) {
        throw ValidationError("Rng::below: bound must be positive");
    }
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = 0;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t population, std::size_t count) {
    if (count > population) {
        throw ValidationError("sample_without_replacement: count " + std::to_string(count) +
                              " exceeds population " + std::to_string(population));
    }
    std::vector<std::size_t> pool(population);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + below(population - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

Rng Rng::fork() {
    return Rng(engine_() ^ 0x9E3779B97F4A7C15ULL);
}

} // namespace agnet
