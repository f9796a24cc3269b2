#pragma once

#include <stdexcept>
#include <string>

namespace specdegen {

// Bad user input or violated precondition. The CLI maps this to exit code 2.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (e.g. energy below threshold).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Refusal to compute at a resolution that cannot deliver the requested accuracy.
// The CLI maps this to exit code 3.
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OverflowError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail_validation(const std::string& what);

}  // namespace specdegen
