#pragma once

#include <stdexcept>
#include <string>

namespace star {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor/layer dimension mismatch; the message names the offending axes.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (even kernel size, zero filters, unknown key...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its contract (empty input, non-scalar loss...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Requested frame indices reach before the start of the available history.
class OutOfHistoryError : public Error {
public:
    using Error::Error;
};

/// Malformed text input; the message carries a 1-based line number.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Underlying stream/file failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss; the message names the epoch.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Structured binary container is malformed.
class FormatError : public Error {
public:
    using Error::Error;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncationError : public FormatError {
public:
    using FormatError::FormatError;
};

class NameCollisionError : public FormatError {
public:
    using FormatError::FormatError;
};

} // namespace star
