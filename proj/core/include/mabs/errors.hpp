#pragma once

#include <stdexcept>
#include <string>

namespace mabs {

/// Input violates an operation's domain (nonpositive price, correlation
/// outside [-1,1], mismatched dimensions, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed run configuration or CLI usage.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Internal numeric failure: eigensolver non-convergence, singular pivot
/// block under every permutation. Not expected on valid inputs.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The spectrum is rank deficient; the regular kernel does not exist and the
/// caller should build the degenerate kernel instead.
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The correlation matrix has a negative eigenvalue. No Gaussian law exists
/// there and pricing is undefined.
class IndefiniteError : public std::runtime_error {
public:
    IndefiniteError(const std::string& msg, double determinant, double min_eigenvalue)
        : std::runtime_error(msg), determinant_(determinant), min_eigenvalue_(min_eigenvalue) {}

    double determinant() const { return determinant_; }
    double min_eigenvalue() const { return min_eigenvalue_; }

private:
    double determinant_;
    double min_eigenvalue_;
};

}  // namespace mabs
