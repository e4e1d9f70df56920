// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include "agnet/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>

namespace agnet::binio {

/// Little-endian append helpers over a byte string.
template <typename T>
void put_le(std::string& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
    }
}

inline void put_f64(std::string& out, double value) {
    put_le(out, std::bit_cast<std::uint64_t>(value));
}

/// Bounds-checked little-endian reader; throws ParseError on truncation.
class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get_le(std::size_t record) {
        static_assert(std::is_unsigned_v<T>);
        require(sizeof(T), record);
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return value;
    }

    double get_f64(std::size_t record) { return std::bit_cast<double>(get_le<std::uint64_t>(record)); }

    std::string_view get_bytes(std::size_t n, std::size_t record) {
        require(n, record);
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    [[nodiscard]] bool at_end() const noexcept { return pos_ == bytes_.size(); }
    [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void require(std::size_t n, std::size_t record) const {
        if (bytes_.size() - pos_ < n) {
            throw ParseError("unexpected end of binary data", record);
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace agnet::binio
