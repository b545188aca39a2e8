#pragma once

#include <stdexcept>
#include <string>

namespace on2vec {

// Caller broke a documented precondition (wrong relation kind, negative
// sample that actually holds, mismatched dimensions).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Bad user input: malformed files, unknown names, out-of-range settings.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace on2vec
