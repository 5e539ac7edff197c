#pragma once

#include <stdexcept>
#include <string>

namespace heatmetrics {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument or configuration value violates its contract.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class OutOfGrid : public Error {
public:
    using Error::Error;
};

/// Raised when an attribution carries no mass, so no heatmap can be formed.
class DegenerateHeatmap : public Error {
public:
    using Error::Error;
};

class NonFiniteGradient : public Error {
public:
    using Error::Error;
};

/// The requested part occupies zero pixels of the part mask.
class EmptyPart : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Base for array-container and document parse failures.
class FormatError : public Error {
public:
    using Error::Error;
};

class BadMagic : public FormatError {
public:
    using FormatError::FormatError;
};

class UnsupportedVersion : public FormatError {
public:
    using FormatError::FormatError;
};

class UnsupportedDtype : public FormatError {
public:
    using FormatError::FormatError;
};

class MalformedHeader : public FormatError {
public:
    using FormatError::FormatError;
};

class FortranOrderUnsupported : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedPayload : public FormatError {
public:
    using FormatError::FormatError;
};

}  // namespace heatmetrics
