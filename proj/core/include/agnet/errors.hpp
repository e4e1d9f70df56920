// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agnet {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data or configuration violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Two operands have incompatible shapes.
class ShapeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A text or binary input could not be parsed; `record()` is the 1-based
/// line (text) or record index (binary) where parsing stopped.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t record)
        : ValidationError(what + " (record " + std::to_string(record) + ")"), record_(record) {}

    [[nodiscard]] std::size_t record() const noexcept { return record_; }

private:
    std::size_t record_;
};

/// A computation produced a non-finite value.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
    using Error::Error;
};

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
    ok = 0,
    validation = 1,
    numeric = 2,
    io = 3,
};

} // namespace agnet
