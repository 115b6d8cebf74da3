#ifndef FEZ_ERRORS_HPP
#define FEZ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fez {

/// API misuse: mismatched basis tags, wrong vector lengths, bad arguments.
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Requested problem size exceeds a configured cap.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input data violates a precondition (non-finite values, non-integer
/// values in integer arithmetic mode).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Value outside the representable range of a quantizer.
struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested tolerance cannot be met within the supported bit widths.
struct ToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated serialized data.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iterative solver failed to converge.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A model scenario violates its solvability condition.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File system failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fez

#endif
