#pragma once

#include <stdexcept>
#include <string>

namespace party {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input syntax (bad JSON, bad CSV row, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally well-formed input that violates a data invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Unknown skeleton id, part name, or similar key.
class LookupError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Fewer frames than an operation needs.
class InsufficientFramesError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// A direction vector collapsed below the numerical floor.
class DegenerateGeometryError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Filesystem / stream failures.
class IoError : public Error {
public:
    using Error::Error;
};

// A caller-supplied hook broke its contract.
class ContractError : public Error {
public:
    using Error::Error;
};

} // namespace party
