#pragma once

#include <stdexcept>
#include <string>

namespace softprog {

// Shape mismatches, unbound variables, malformed programs.
struct structural_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Violations of a numeric domain (log of a non-positive value, division by
// zero, non-positive depth in a projection, ...).
struct numeric_domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Invalid hyperparameters (beta <= 0, too many classes for the exhaustive
// matcher, ...).
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid experiment configuration / CLI usage.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace softprog
