#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qnd {

// Base of every error thrown by the library. The CLI maps InvalidParameter
// subclasses to exit code 2 and NumericalValidation to exit code 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller-supplied value violates a documented precondition.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

class InvalidDimension : public InvalidParameter {
public:
    using InvalidParameter::InvalidParameter;
};

class DimensionMismatch : public InvalidParameter {
public:
    using InvalidParameter::InvalidParameter;
};

class NotHermitian : public InvalidParameter {
public:
    using InvalidParameter::InvalidParameter;
};

class InvalidResolution : public InvalidParameter {
public:
    using InvalidParameter::InvalidParameter;
};

class GridCoverage : public InvalidParameter {
public:
    using InvalidParameter::InvalidParameter;
};

// The Fock truncation cannot hold the requested state; required_dim() is the
// smallest dimension that would.
class TruncationTooSmall : public InvalidParameter {
public:
    TruncationTooSmall(const std::string& what, std::size_t required)
        : InvalidParameter(what), required_(required) {}

    std::size_t required_dim() const noexcept { return required_; }

private:
    std::size_t required_;
};

class MeterTruncation : public TruncationTooSmall {
public:
    using TruncationTooSmall::TruncationTooSmall;
};

// Outcome probability density at or below the 1e-300 floor; the conditioned
// state is numerically undefined.
class VanishingDensity : public Error {
public:
    using Error::Error;
};

// Two independent computation paths disagree beyond tolerance.
class NumericalValidation : public Error {
public:
    using Error::Error;
};

}  // namespace qnd
