#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace knapcount {

// Bad user-supplied data: malformed instances, out-of-range parameters.
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A table or state space would exceed the configured memory/time budget.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A rejection sampler exhausted its retry budget; no string was emitted.
struct sampling_failure : std::runtime_error {
    std::size_t draw_index;
    sampling_failure(std::size_t draw, const std::string& msg)
        : std::runtime_error(msg), draw_index(draw) {}
};

// An implicit-program oracle violated its ordering/midpoint contract.
struct oracle_contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace knapcount
