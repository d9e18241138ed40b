#pragma once

#include <stdexcept>
#include <string>

namespace chainclust {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input lies outside the mathematical domain (negative probabilities,
/// asymmetric matrix where a symmetric one is required, reducible block...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument is out of its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The k-th and (k+1)-th smallest singular values (or |eigenvalues|) are too
/// close for the split projector to be well defined.
class DegenerateGapError : public Error {
 public:
  DegenerateGapError(const std::string& what, double upper_small, double lower_large)
      : Error(what), upper_small_(upper_small), lower_large_(lower_large) {}

  double upper_small() const noexcept { return upper_small_; }
  double lower_large() const noexcept { return lower_large_; }

 private:
  double upper_small_;
  double lower_large_;
};

/// 2 x ||E||_2 >= sigma_{n-k}(I - T_0): the projector perturbation bound is vacuous.
class OutOfRegimeError : public Error {
 public:
  using Error::Error;
};

/// Spectral hypothesis of the symmetric projector bound is not met.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// The sorted distance list has no index with d_i >= 2 d_{i+1}, or none of
/// the tried gap indices produced a usable partition.
class NoGapError : public Error {
 public:
  using Error::Error;
};

/// No candidate set passed the size cap of the one-cluster approximation.
class NoCandidateError : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace chainclust
