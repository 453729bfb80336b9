#pragma once

#include <stdexcept>
#include <string>

namespace rpqst {

// Error categories map onto CLI exit codes: validation -> 2, numeric -> 3, io -> 4.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration or input values (bad angles, non-unit vectors,
// malformed files, invariant-violating matrices).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Numerical failure: degenerate fits, impossible reconstructions,
// unreachable calibration targets.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace rpqst
