#ifndef ADAMIXUP_ERRORS_HPP
#define ADAMIXUP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace adamixup {

// Caller violated an operation's contract (bad argument, missing state).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes do not conform for the requested operation.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// A forward pass produced NaN/Inf; overflow is an error, never silent state.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed external data (IDX, CSV, checkpoint, config).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace adamixup

#endif
