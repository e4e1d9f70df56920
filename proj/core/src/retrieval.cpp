// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/retrieval.hpp"

#include "agnet/binary_io.hpp"
#include "agnet/errors.hpp"

#include <bit>

namespace agnet {

namespace {

constexpr std::string_view kCodeMagic = "AGH1";

std::uint64_t padding_mask(std::size_t code_length) {
    const std::size_t used = code_length % 64;
    return used == 0 ? 0 : ~((std::uint64_t{1} << used) - 1);
}

void require_query(std::span<const std::uint64_t> query, const CodeMatrix& db) {
    if (query.size() != db.words_per_code()) {
        throw ShapeError("query has " + std::to_string(query.size()) + " words, database codes have " +
                         std::to_string(db.words_per_code()));
    }
}

} // namespace

CodeMatrix::CodeMatrix(std::size_t code_length)
    : code_length_(code_length), words_per_code_((code_length + 63) / 64) {
    if (code_length < 1 || code_length > kMaxCodeLength) {
        throw ValidationError("code length " + std::to_string(code_length) + " is outside 1.." +
                              std::to_string(kMaxCodeLength));
    }
}

void CodeMatrix::reserve(std::size_t n) {
    words_.reserve(n * words_per_code_);
    labels_.reserve(n);
}

void CodeMatrix::push_back(std::span<const std::uint64_t> words, Label label) {
    if (words.size() != words_per_code_) {
        throw ShapeError("CodeMatrix::push_back: expected " + std::to_string(words_per_code_) + " words, got " +
                         std::to_string(words.size()));
    }
    if ((words.back() & padding_mask(code_length_)) != 0) {
        throw ValidationError("CodeMatrix::push_back: padding bits beyond code length are set");
    }
    words_.insert(words_.end(), words.begin(), words.end());
    labels_.push_back(label);
}

void CodeMatrix::push_back_bits(std::span<const bool> bits, Label label) {
    if (bits.size() != code_length_) {
        throw ShapeError("CodeMatrix::push_back_bits: expected " + std::to_string(code_length_) + " bits, got " +
                         std::to_string(bits.size()));
    }
    std::vector<std::uint64_t> packed(words_per_code_, 0);
    for (std::size_t b = 0; b < bits.size(); ++b) {
        if (bits[b]) {
            packed[b / 64] |= std::uint64_t{1} << (b % 64);
        }
    }
    push_back(packed, label);
}

CodeMatrix CodeMatrix::gather(std::span<const std::size_t> indices) const {
    CodeMatrix out(code_length_);
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= size()) {
            throw ShapeError("CodeMatrix::gather: index " + std::to_string(i) + " out of range");
        }
        out.push_back(code(i), labels_[i]);
    }
    return out;
}

std::size_t hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    if (a.size() != b.size()) {
        throw ShapeError("hamming: codes have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                         " words");
    }
    std::size_t d = 0;
    for (std::size_t w = 0; w < a.size(); ++w) {
        d += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
    }
    return d;
}

std::vector<std::size_t> distances(std::span<const std::uint64_t> query, const CodeMatrix& db) {
    require_query(query, db);
    std::vector<std::size_t> out(db.size());
    const auto words = db.words();
    const std::size_t wpc = db.words_per_code();
    if (wpc == 1) {
        const std::uint64_t q = query[0];
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = static_cast<std::size_t>(std::popcount(q ^ words[i]));
        }
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t d = 0;
        for (std::size_t w = 0; w < wpc; ++w) {
            d += static_cast<std::size_t>(std::popcount(query[w] ^ words[i * wpc + w]));
        }
        out[i] = d;
    }
    return out;
}

RankedList rank(std::span<const std::uint64_t> query, const CodeMatrix& db) {
    if (db.empty()) {
        throw ValidationError("rank: empty database");
    }
    const auto dist = distances(query, db);
    // Counting sort: a stable pass over ids keeps ties in ascending id order.
    std::vector<std::size_t> start(db.code_length() + 2, 0);
    for (std::size_t d : dist) {
        ++start[d + 1];
    }
    for (std::size_t k = 1; k < start.size(); ++k) {
        start[k] += start[k - 1];
    }
    RankedList ranked(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        ranked[start[dist[i]]++] = RankedEntry{i, dist[i]};
    }
    return ranked;
}

std::vector<std::size_t> within_radius(std::span<const std::uint64_t> query, const CodeMatrix& db,
                                       std::size_t radius) {
    const auto dist = distances(query, db);
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] <= radius) {
            ids.push_back(i);
        }
    }
    return ids;
}

std::string serialize_codes(const CodeMatrix& codes) {
    std::string out(kCodeMagic);
    out.reserve(16 + codes.size() * (codes.words_per_code() * 8 + 4));
    binio::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(codes.code_length()));
    binio::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(codes.size()));
    for (std::size_t i = 0; i < codes.size(); ++i) {
        for (std::uint64_t w : codes.code(i)) {
            binio::put_le<std::uint64_t>(out, w);
        }
        binio::put_le<std::uint32_t>(out, codes.label(i));
    }
    return out;
}

CodeMatrix deserialize_codes(std::string_view bytes) {
    binio::Reader in(bytes);
    if (in.get_bytes(kCodeMagic.size(), 0) != kCodeMagic) {
        throw ParseError("code file: bad magic", 0);
    }
    const auto code_length = in.get_le<std::uint32_t>(0);
    const auto count = in.get_le<std::uint64_t>(0);
    CodeMatrix codes(code_length);
    const std::size_t record_bytes = codes.words_per_code() * 8 + 4;
    if (count > in.remaining() / record_bytes) {
        throw ParseError("code file: header claims " + std::to_string(count) + " codes but the file is shorter", 0);
    }
    codes.reserve(static_cast<std::size_t>(count));
    std::vector<std::uint64_t> words(codes.words_per_code());
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::size_t record = static_cast<std::size_t>(i) + 1;
        for (auto& w : words) {
            w = in.get_le<std::uint64_t>(record);
        }
        const auto label = in.get_le<std::uint32_t>(record);
        if ((words.back() & padding_mask(code_length)) != 0) {
            throw ParseError("code file: padding bits set", record);
        }
        codes.push_back(words, label);
    }
    if (!in.at_end()) {
        throw ParseError("code file: trailing bytes", static_cast<std::size_t>(count) + 1);
    }
    return codes;
}

void save_codes(const CodeMatrix& codes, const std::filesystem::path& path) {
    binio::write_file(path, serialize_codes(codes));
}

CodeMatrix load_codes(const std::filesystem::path& path) {
    return deserialize_codes(binio::read_file(path));
}

} // namespace agnet
