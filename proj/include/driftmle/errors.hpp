#pragma once

#include <stdexcept>
#include <string>

namespace driftmle {

// Invalid user input: bad model string, out-of-range parameter, malformed grid.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failure: singular covariance, non-convergent iteration.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File read/write failure.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace driftmle
