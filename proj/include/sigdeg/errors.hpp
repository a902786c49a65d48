#pragma once

#include <stdexcept>
#include <string>

namespace sigdeg {

// Invalid arguments are reported with std::invalid_argument throughout.

/// Quadrature or linear-algebra routine failed to reach its tolerance.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or otherwise diverged.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sigdeg
