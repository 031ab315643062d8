#pragma once

#include <stdexcept>
#include <string>

namespace facetemb {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Missing/unreadable/unwritable files.
struct IoError : Error {
    using Error::Error;
};

/// Malformed input contents (bad line, bad header, bad value).
struct FormatError : Error {
    using Error::Error;
};

/// Precondition violations on arguments.
struct InvalidArgument : Error {
    using Error::Error;
};

/// Inputs that do not belong together (checkpoint vs corpus digests).
struct StateMismatchError : Error {
    using Error::Error;
};

/// Non-finite values, degenerate vectors, failed convergence.
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace facetemb
