// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace agnet::detail {

/// Comma split without quoting; the toolkit's formats never quote fields.
std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

/// Strict parsers: the whole field must be consumed. Throw ParseError.
double parse_double(std::string_view field, std::size_t line);
std::uint64_t parse_u64(std::string_view field, std::size_t line);

/// Shortest representation that round-trips exactly.
std::string format_double(double value);

/// File contents split into lines; a final empty line is dropped and a
/// trailing '\r' is stripped. Throws IoError.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes: truncate then write.
void write_text(const std::filesystem::path& path, std::string_view contents);

} // namespace agnet::detail
