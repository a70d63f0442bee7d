#pragma once
#include <stdexcept>
#include <string>

namespace opo {

// domain: inputs outside a model's validity, or a physically impossible request
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// a root or a branch that was asked for does not exist
struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// malformed or inconsistent data files / traces
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad arguments to an operation (empty window, zero step, ...)
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace opo
