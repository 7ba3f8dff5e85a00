#pragma once

#include <stdexcept>
#include <string>

namespace evtc {

// Base class for all evtc errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad inputs: out-of-range parameters, malformed records, unsupported
// configurations. Maps to exit code 1 in the CLI.
class ValidationError : public Error {
public:
    using Error::Error;
};

// File system / parsing failures. Maps to exit code 2 in the CLI.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace evtc
