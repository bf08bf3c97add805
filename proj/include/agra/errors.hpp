#pragma once

#include <stdexcept>
#include <string>

namespace agra {

// Failure classes map one-to-one onto CLI exit codes, see tools/.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Version mismatch, checksum mismatch, inconsistent artifact lineage.
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required (divergence and the like).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace agra
