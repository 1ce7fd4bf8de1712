#pragma once

#include <stdexcept>
#include <string>

namespace pottsrf {

/// File could not be opened, read, or written.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input data; the message carries the offending line number.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical degeneracy or divergence detected during computation.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pottsrf
