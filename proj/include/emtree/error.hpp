#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace emtree {

// Bad input data or file contents. The CLI maps this family to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BadMagicError : public DataError {
public:
    using DataError::DataError;
};

class VersionMismatchError : public DataError {
public:
    using DataError::DataError;
};

class TruncatedError : public DataError {
public:
    using DataError::DataError;
};

class DuplicateDocIdError : public DataError {
public:
    explicit DuplicateDocIdError(const std::string& doc_id)
        : DataError("duplicate doc_id: " + doc_id), doc_id_(doc_id) {}
    const std::string& doc_id() const noexcept { return doc_id_; }

private:
    std::string doc_id_;
};

// Malformed record inside an otherwise readable file (binary or text).
class ParseError : public DataError {
public:
    ParseError(std::uint64_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::uint64_t line() const noexcept { return line_; }

private:
    std::uint64_t line_;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class InsufficientDataError : public DataError {
public:
    using DataError::DataError;
};

// Raised by prune when no leaf received a point.
class EmptyTreeError : public DataError {
public:
    EmptyTreeError() : DataError("all branches empty") {}
};

class CoverageError : public DataError {
public:
    using DataError::DataError;
};

// Signatures or keys of different widths were combined. Always a caller bug.
class DimensionMismatch : public std::logic_error {
public:
    DimensionMismatch(std::size_t expected, std::size_t actual)
        : std::logic_error("dimension mismatch: expected " + std::to_string(expected) + " bits, got " +
                           std::to_string(actual)) {}
};

}  // namespace emtree
