#pragma once

#include <stdexcept>
#include <string>

namespace lesstrees {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input has no usable signal (e.g. an all-zero matrix). Callers typically
/// fall back to the uniform feature distribution.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Malformed dataset, model or config file.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace lesstrees
