// errors.hpp: Exception hierarchy shared by all stirap modules

#pragma once

#include <stdexcept>
#include <string>

namespace stirap {

// Malformed or non-finite input values
struct invalid_input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Hermitian matrix too close to singular to invert safely
struct conditioning_error : std::runtime_error {
    double eigenvalue_ratio{0.0}; // min/max eigenvalue magnitude at failure

    conditioning_error(const std::string& msg, double ratio)
        : std::runtime_error(msg), eigenvalue_ratio(ratio) {}
};

// Requested pair state has vanishing coupling strength
struct degenerate_pair_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed forms exist only for specific (F, F') patterns
struct unsupported_transition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Two-level overlap outside the physical range
struct invalid_overlap_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Adaptive ODE step underflow or accuracy target missed
struct integration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Schrödinger stepper lost unitarity beyond tolerance
struct propagation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal cross-check failed: results disagree with each other
struct consistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace stirap

namespace stirap::cli {

// Config file failed to parse or validate; carries the offending field
struct config_error : std::runtime_error {
    std::string field;

    explicit config_error(const std::string& msg, std::string field_name = "")
        : std::runtime_error(msg), field(std::move(field_name)) {}
};

} // namespace stirap::cli
