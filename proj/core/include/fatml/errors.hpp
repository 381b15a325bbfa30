#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fatml {

/// Base class for all library errors. Carries an optional pipeline stage
/// label so orchestration code can report where a failure originated.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    Error(const std::string& stage, const std::string& msg)
        : std::runtime_error("[" + stage + "] " + msg), stage_(stage) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

class MissingColumnError : public Error {
public:
    explicit MissingColumnError(const std::string& column)
        : Error("missing column: " + column), column_(column) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class CsvParseError : public Error {
public:
    CsvParseError(size_t row, const std::string& column, const std::string& what)
        : Error("parse error at row " + std::to_string(row) + ", column " + column + ": " + what),
          row_(row), column_(column) {}
    size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    size_t row_;
    std::string column_;
};

class SchemaMismatchError : public Error {
public:
    explicit SchemaMismatchError(const std::string& msg) : Error("schema mismatch: " + msg) {}
};

class AllMissingColumnError : public Error {
public:
    explicit AllMissingColumnError(const std::string& column)
        : Error("no observed training values in column: " + column), column_(column) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& msg) : Error("degenerate input: " + msg) {}
};

class LengthMismatchError : public Error {
public:
    LengthMismatchError(size_t a, size_t b)
        : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class WidthMismatchError : public Error {
public:
    WidthMismatchError(size_t expected, size_t got)
        : Error("feature width mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
};

class EmptyBandError : public Error {
public:
    EmptyBandError() : Error("no rows fall inside the evaluation band") {}
};

class NotIterativeError : public Error {
public:
    NotIterativeError() : Error("model family has no iteration log") {}
    explicit NotIterativeError(const std::string& family)
        : Error("model family has no iteration log: " + family) {}
};

class NotLinearError : public Error {
public:
    NotLinearError() : Error("model family is not linear") {}
    explicit NotLinearError(const std::string& family)
        : Error("model family is not linear: " + family) {}
};

class TooFewRowsError : public Error {
public:
    TooFewRowsError(size_t n, size_t needed)
        : Error("too few rows: " + std::to_string(n) + " (need at least " + std::to_string(needed) + ")") {}
};

class NonFiniteLossError : public Error {
public:
    explicit NonFiniteLossError(const std::string& msg) : Error("non-finite loss: " + msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config: " + msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("io: " + msg) {}
};

}  // namespace fatml
