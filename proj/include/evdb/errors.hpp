#pragma once

#include <stdexcept>
#include <string>

namespace evdb {

// Error taxonomy shared across the library. The CLI maps these onto process
// exit codes: UsageError -> 1, InputError/IoError -> 2, DimError/ConfigError/
// StateError/NumericError -> 3.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shape mismatch.
struct DimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Broken internal invariant (non-positive residual sum, bad checkpoint, ...).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// NaN/Inf surfaced by a tensor primitive; fail fast instead of propagating.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace evdb
