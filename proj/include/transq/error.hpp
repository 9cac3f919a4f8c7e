#pragma once

#include <stdexcept>
#include <string>

namespace transq {

// Bad user input: parameters, configs, mismatched grids.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A broken internal invariant (empty argmin set, out-of-range composition).
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace transq
