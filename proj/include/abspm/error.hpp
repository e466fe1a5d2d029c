#pragma once

#include <stdexcept>
#include <string>

namespace abspm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad configuration, malformed specs, out-of-range values.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A required input artifact or precondition is missing. CLI exit code 2.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// File parsing failure with location context.
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace abspm
