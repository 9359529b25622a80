#pragma once

#include <stdexcept>
#include <string>

namespace lightguide {

/// Base class for every error the engine reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed document (JSON syntax, wrong types, missing required keys).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A document or object violates a domain invariant. The message names it.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An id does not refer to an existing object.
class UnknownIdError : public Error {
public:
    using Error::Error;
};

/// An edit would place geometry outside its legal range.
class GeometryError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A job observed its stop request; no partial result exists.
class CancelledError : public Error {
public:
    CancelledError() : Error("cancelled") {}
};

/// An id refers to an object that was superseded (e.g. a suggestion of an old batch).
class StaleIdError : public Error {
public:
    using Error::Error;
};

}  // namespace lightguide
