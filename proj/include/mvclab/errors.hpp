#pragma once

#include <stdexcept>

namespace mvclab {

// Shape/arity violations between tensors or network layers.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numeric domain violations (log of non-positive, zero-norm rows, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Caller broke an API precondition (non-scalar loss, unnormalized rows, ...).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Invalid run configuration (missing predictor, mask absent in incomplete mode, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// On-disk dataset/checkpoint format problems.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mvclab
