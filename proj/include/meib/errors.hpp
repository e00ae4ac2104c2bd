#pragma once

#include <stdexcept>
#include <string>

namespace meib {

/// Shape or size disagreement between operands.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid parameter value (alpha, sigma, fractions, config fields).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite intermediate, failed PSD check, or other numeric breakdown.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File and parse failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace meib
