// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agnet {

/// Bit-packed binary codes with one label per code.
///
/// Bit b of a code lives in word b / 64 at position b % 64. Padding bits past
/// the code length are always zero, so a popcount over whole words is the
/// Hamming distance.
class CodeMatrix {
public:
    static constexpr std::size_t kMaxCodeLength = 4096;

    CodeMatrix() = default;
    /// Throws ValidationError unless 1 ≤ code_length ≤ kMaxCodeLength.
    explicit CodeMatrix(std::size_t code_length);

    [[nodiscard]] std::size_t code_length() const noexcept { return code_length_; }
    [[nodiscard]] std::size_t words_per_code() const noexcept { return words_per_code_; }
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] bool empty() const noexcept { return labels_.empty(); }

    void reserve(std::size_t n);
    /// Appends a packed code; throws if the word count is wrong or padding bits are set.
    void push_back(std::span<const std::uint64_t> words, Label label);
    /// Appends a code given one bool per bit.
    void push_back_bits(std::span<const bool> bits, Label label);

    [[nodiscard]] std::span<const std::uint64_t> code(std::size_t i) const noexcept {
        return {words_.data() + i * words_per_code_, words_per_code_};
    }
    [[nodiscard]] bool bit(std::size_t i, std::size_t b) const noexcept {
        return (code(i)[b / 64] >> (b % 64)) & 1U;
    }
    [[nodiscard]] Label label(std::size_t i) const noexcept { return labels_[i]; }
    [[nodiscard]] const std::vector<Label>& labels() const noexcept { return labels_; }
    [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }

    [[nodiscard]] CodeMatrix gather(std::span<const std::size_t> indices) const;

    bool operator==(const CodeMatrix&) const = default;

private:
    std::size_t code_length_ = 0;
    std::size_t words_per_code_ = 0;
    std::vector<std::uint64_t> words_;
    std::vector<Label> labels_;
};

/// Number of differing bits. Throws ShapeError on word-count mismatch.
[[nodiscard]] std::size_t hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

struct RankedEntry {
    std::size_t id;
    std::size_t distance;

    bool operator==(const RankedEntry&) const = default;
};

/// Ascending Hamming distance, ties by ascending id.
using RankedList = std::vector<RankedEntry>;

/// Hamming distance from `query` to every database code, in database order.
[[nodiscard]] std::vector<std::size_t> distances(std::span<const std::uint64_t> query, const CodeMatrix& db);

/// Exact ranking of the whole database (counting sort on distance).
[[nodiscard]] RankedList rank(std::span<const std::uint64_t> query, const CodeMatrix& db);

/// Ids at Hamming distance ≤ radius, ascending.
[[nodiscard]] std::vector<std::size_t> within_radius(std::span<const std::uint64_t> query, const CodeMatrix& db,
                                                     std::size_t radius);

/// Code file: "AGH1", u32 code length, u64 count, then per code the packed
/// 64-bit words followed by a u32 label, all little-endian.
[[nodiscard]] std::string serialize_codes(const CodeMatrix& codes);
[[nodiscard]] CodeMatrix deserialize_codes(std::string_view bytes);

void save_codes(const CodeMatrix& codes, const std::filesystem::path& path);
[[nodiscard]] CodeMatrix load_codes(const std::filesystem::path& path);

} // namespace agnet
