#pragma once

#include <stdexcept>

namespace soiling {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or degenerate input data (CLI exit code 2).
class InputError : public Error {
public:
    using Error::Error;
};

}  // namespace soiling
