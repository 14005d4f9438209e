#pragma once

#include <stdexcept>
#include <string>

namespace ssalt {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid inputs: malformed plans, out-of-range indices, bad levels.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Singular matrices, zero probabilities and other numerical dead ends.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace ssalt
