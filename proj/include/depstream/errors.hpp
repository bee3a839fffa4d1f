#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace depstream {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range constructor or function argument.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Non-finite input or a computation that produced NaN/infinity.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Unparseable line in a text input. Carries the 1-based line number.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A finite stream ran out of values.
class StreamExhaustedError : public Error {
 public:
  using Error::Error;
};

/// A kernel CDF or quantile returned an unusable value.
class KernelError : public Error {
 public:
  using Error::Error;
};

/// A discrete forward move landed on a zero-width probability interval.
class DegenerateKernelError : public KernelError {
 public:
  using KernelError::KernelError;
};

/// Forward and reverse kernels disagree on which moves are possible.
class BalanceError : public KernelError {
 public:
  using KernelError::KernelError;
};

/// Target density is zero where a reverse kernel needs to divide by it.
class SupportError : public Error {
 public:
  using Error::Error;
};

/// Gibbs conditional requested for a coordinate without a tractable one.
class UnsupportedTargetError : public Error {
 public:
  using Error::Error;
};

/// Proposal density is zero at the proposed point.
class ProposalSupportError : public Error {
 public:
  using Error::Error;
};

/// Slice bracket stepping out hit its iteration cap.
class ExpansionLimitError : public Error {
 public:
  using Error::Error;
};

/// Sampler handed a state with zero density or out-of-range auxiliaries.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Recorded draws do not match what the reverse replay consumes.
class ReplayError : public Error {
 public:
  using Error::Error;
};

/// Trace with zero variance, for which ESS is undefined.
class DegenerateTraceError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace depstream
