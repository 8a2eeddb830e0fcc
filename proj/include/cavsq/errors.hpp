#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace cavsq {

/// Invalid input to a library call (bad mode index, r <= 1, mismatched layouts, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Amplitude-table cutoffs too small for the requested tail tolerance.
class CutoffError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Integration or factorization failed a numerical guard (norm drift, loss of PSD, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The drift matrix has an eigenvalue with non-negative real part.
class StabilityError : public NumericalError {
 public:
  StabilityError(const std::string& what, std::complex<double> eigenvalue)
      : NumericalError(what), eigenvalue_(eigenvalue) {}
  std::complex<double> eigenvalue() const noexcept { return eigenvalue_; }

 private:
  std::complex<double> eigenvalue_;
};

}  // namespace cavsq
