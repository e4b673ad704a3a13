#pragma once

#include <stdexcept>
#include <string>

namespace cge {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A level, exponent or index outside its admissible range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Malformed CGE1 field file.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Invalid generator or solver parameters (non-SPD input, bad stripe list, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A cell matrix that cannot be inverted where the inverse is required.
class DegenerateFieldError : public Error {
public:
    using Error::Error;
};

/// The grid is too coarse to represent the requested construction.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Bad solver or run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace cge
