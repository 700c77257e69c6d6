#pragma once

#include <stdexcept>

namespace qhd {

// Runtime guard tripped mid-computation: norm drift, CFL violation,
// step rejection. The CLI maps this to exit code 3.
struct NumericalAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario file failed validation. The CLI maps this to exit code 2.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qhd
