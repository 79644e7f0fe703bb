#pragma once

#include <stdexcept>
#include <string>

namespace lsv {

/// Invalid model, claim or numerical parameters.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A series, quadrature or transform failed to converge within its limits.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A payoff transform that does not exist for the requested basis.
class DivergentTransform : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

}  // namespace lsv
