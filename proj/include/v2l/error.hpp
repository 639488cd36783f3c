#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace v2l {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad files, wrong dimensions, missing records).
class DataError : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Shape mismatch between tensors.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Network or endpoint failure.
class NetworkError : public Error {
public:
    using Error::Error;
};

using WarningSink = std::function<void(const std::string&)>;

/// Emit a warning through the installed sink (stderr by default).
void warn(const std::string& message);

/// Replace the warning sink; returns the previous one.
WarningSink set_warning_sink(WarningSink sink);

#define V2L_REQUIRE(cond, ExcType, msg)             \
    do {                                            \
        if (!(cond)) throw ExcType(std::string(msg)); \
    } while (0)

}  // namespace v2l
