// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "csv.hpp"

#include "agnet/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace agnet::detail {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view field, std::size_t line) {
    field = trim(field);
    double value = 0.0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw ParseError("invalid number '" + std::string(field) + "'", line);
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite number '" + std::string(field) + "'", line);
    }
    return value;
}

std::uint64_t parse_u64(std::string_view field, std::size_t line) {
    field = trim(field);
    std::uint64_t value = 0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw ParseError("invalid integer '" + std::string(field) + "'", line);
    }
    return value;
}

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw Error("format_double: conversion failed");
    }
    return std::string(buf, ptr);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
    }
    if (in.bad()) {
        throw IoError("read failure on " + path.string());
    }
    return lines;
}

void write_text(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw IoError("write failure on " + path.string());
    }
}

} // namespace agnet::detail
