#pragma once

#include <stdexcept>
#include <string>

namespace stscnn {

// Root of every error the library raises. The CLI maps the subclasses onto
// exit codes (argument -> 1, shape/format/config/io -> 2, numeric -> 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor or raster dimensions that do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid network/training configuration (channel arithmetic, kernel size).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A function argument outside its documented range.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Malformed file: bad magic, version, dtype, truncated payload, bad JSON.
class FormatError : public Error {
public:
    using Error::Error;
};

// A file that cannot be opened, created or fully written.
class IoError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or gradient, degenerate statistics.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace stscnn
