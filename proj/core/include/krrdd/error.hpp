#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace krrdd {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition: bad shape, non-finite input, out-of-range parameter.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Problems with input data: malformed files, unusable label sets.
class DataError : public Error {
 public:
  using Error::Error;
};

class BadMagic : public DataError {
 public:
  BadMagic(std::string path, unsigned expected, unsigned found);
  unsigned expected() const { return expected_; }
  unsigned found() const { return found_; }

 private:
  unsigned expected_;
  unsigned found_;
};

class TruncatedFile : public DataError {
 public:
  using DataError::DataError;
};

class CountMismatch : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientExamples : public DataError {
 public:
  using DataError::DataError;
};

/// All-zero labels: the fitted predictor has zero RKHS norm and cannot be rescaled.
class DegenerateLabels : public DataError {
 public:
  using DataError::DataError;
};

/// Factorizations and solves that fail on otherwise well-formed input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Cholesky failed even after the requested diagonal jitter.
class NeedsLargerJitter : public NumericalError {
 public:
  NeedsLargerJitter(std::size_t pivot, double jitter);
  std::size_t pivot() const { return pivot_; }
  double jitter() const { return jitter_; }

 private:
  std::size_t pivot_;
  double jitter_;
};

/// Every pooled feature received a zero ridge leverage score.
class LeverageDegenerate : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// phi(S) lost column rank; the caller should draw a fresh S.
class ResampleS : public NumericalError {
 public:
  ResampleS(std::size_t rank, std::size_t required);
  std::size_t rank() const { return rank_; }
  std::size_t required() const { return required_; }

 private:
  std::size_t rank_;
  std::size_t required_;
};

}  // namespace krrdd
