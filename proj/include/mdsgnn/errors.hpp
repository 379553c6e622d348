#pragma once

#include <stdexcept>
#include <string>

namespace mdsgnn {

// Usage / configuration problems. The CLI maps these to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent data (bad dataset files, violated graph
// invariants, degenerate inputs). CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures: shape mismatches, non-finite losses, gradient
// check failures. CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mdsgnn
