#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qesr {

/// Bad input to a library operation (violated precondition or type invariant).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rejected configuration. `field` is the dotted path of the offending key,
/// e.g. `ensembles[0].lines[1].fwhm_hz`; empty for syntax errors.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& what) : InvalidArgument(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical guard tripped. The CLI maps every subclass to exit status 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// W(ω) evaluated exactly on a node frequency with γ₀ = 0.
class PoleCollisionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The inversion window does not contain the transfer function's support.
class WindowTooSmallError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MemoryBudgetError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// No cavity-population minimum was found (overdamped or decoupled regime).
class OscillationNotFound : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The τ grid cannot resolve the vacuum Rabi oscillation.
class GridTooCoarseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SaturationGuardError : public NumericalError {
 public:
  SaturationGuardError(const std::string& what, double omega_p, double n_transferred)
      : NumericalError(what), omega_p_(omega_p), n_transferred_(n_transferred) {}

  double omega_p() const noexcept { return omega_p_; }
  double n_transferred() const noexcept { return n_transferred_; }

 private:
  double omega_p_;
  double n_transferred_;
};

}  // namespace qesr
