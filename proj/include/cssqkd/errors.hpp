#ifndef CSSQKD_ERRORS_HPP
#define CSSQKD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cssqkd {

/// Caller violated a precondition (bad arguments, mismatched shapes, ...).
struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A configured enumeration or size cap was exceeded.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Required code is absent from the code bank.
struct codebank_miss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cssqkd

#endif
