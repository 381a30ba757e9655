#pragma once

#include <stdexcept>
#include <string>

namespace tacslip {

// Bad caller input: wrong dimensions, mismatched sensors, malformed files,
// degenerate training sets. The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric breakdown: non-finite loss, unreachable solve target.
// The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tacslip
