#pragma once

#include <stdexcept>
#include <string>

namespace spinecho {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: bad flags, contradictory configuration, out-of-range values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Requested geometry cannot be realized (e.g. positions for d = infinity).
class UnsupportedGeometry : public Error {
public:
    using Error::Error;
};

/// Two spins sit on top of each other; the coupling is undefined.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

/// Problem is too large for the selected dense method.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// A numerical routine left its domain of validity (diverging series, non-unitary input).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// No closed form exists for the requested case.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Output could not be written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace spinecho
