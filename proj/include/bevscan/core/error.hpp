#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bev {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated operation precondition (zero swap input, zero debt, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Malformed trace, log or fixture-spec line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
public:
    ValidationError(std::uint64_t block, const std::string& field, const std::string& what)
        : Error("block " + std::to_string(block) + ", " + field + ": " + what),
          block_(block), field_(field) {}

    std::uint64_t block() const noexcept { return block_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::uint64_t block_;
    std::string field_;
};

/// Infeasible fixture specification.
class SpecError : public Error {
public:
    using Error::Error;
};

/// A detector output disagreed with its independent re-check.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

class InputAssetNotInPool : public Error {
public:
    using Error::Error;
};

class EmptyPool : public Error {
public:
    using Error::Error;
};

} // namespace bev
