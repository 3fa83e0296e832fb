#pragma once

// Spectral envelope α(ω − ω_p) of the spectroscopy pulse.
//
// Every shape is normalized to α(0) = 1. The Lorentzian and rectangular
// pulses end at t = 0, where the swap to the cavity begins; the Gaussian is a
// zero-phase spectral model:
//
//   lorentzian   α(x) = (δ/2) / (δ/2 + i x)     exponential rise, |α|² FWHM δ
//   gaussian     α(x) = exp(−2 ln2 x²/δ²)       real, |α|² FWHM δ
//   rectangular  α(x) = e^{−ixT/2} sinc(xT/2)  flat pulse on [−T, 0]
//
// The Lorentzian phase is fixed by causality: a spin detuned by x that is
// driven until t = 0 carries ∫ E(t') e^{ixt'} dt'.

#include <cmath>
#include <complex>
#include <numbers>
#include <string_view>

#include "qesr/errors.hpp"

namespace qesr {

enum class PulseShape { lorentzian, gaussian, rectangular };

inline std::string_view to_string(PulseShape shape) {
  switch (shape) {
    case PulseShape::lorentzian: return "lorentzian";
    case PulseShape::gaussian: return "gaussian";
    case PulseShape::rectangular: return "rectangular";
  }
  return "?";
}

class PulseEnvelope {
 public:
  /// sinc²(u) = 1/2 at u = 1.391557, so the sinc²(xT/2) power spectrum has
  /// FWHM 4·1.391557/T.
  static constexpr double sinc2_half_power = 1.3915573782515103;

  static PulseEnvelope lorentzian(double fwhm) { return {PulseShape::lorentzian, checked(fwhm), 0.0}; }
  static PulseEnvelope gaussian(double fwhm) { return {PulseShape::gaussian, checked(fwhm), 0.0}; }
  static PulseEnvelope rectangular(double duration) {
    if (!(duration > 0.0) || !std::isfinite(duration))
      throw InvalidArgument("PulseEnvelope: duration must be finite and > 0");
    return {PulseShape::rectangular, 4.0 * sinc2_half_power / duration, duration};
  }

  PulseShape shape() const noexcept { return shape_; }
  /// δ in rad/s (derived from the duration for the rectangular shape).
  double fwhm() const noexcept { return fwhm_; }
  /// Seconds; zero for the spectral shapes.
  double duration() const noexcept { return duration_; }

  std::complex<double> amplitude(double detuning) const {
    switch (shape_) {
      case PulseShape::lorentzian: {
        const double half = 0.5 * fwhm_;
        return half / std::complex<double>(half, detuning);
      }
      case PulseShape::gaussian:
        return std::exp(-2.0 * std::numbers::ln2 * detuning * detuning / (fwhm_ * fwhm_));
      case PulseShape::rectangular: {
        const double u = 0.5 * detuning * duration_;
        const double sinc = std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u;
        return sinc * std::complex<double>(std::cos(u), -std::sin(u));
      }
    }
    return 0.0;
  }

  friend bool operator==(const PulseEnvelope&, const PulseEnvelope&) = default;

 private:
  PulseEnvelope(PulseShape shape, double fwhm, double duration)
      : shape_(shape), fwhm_(fwhm), duration_(duration) {}

  static double checked(double fwhm) {
    if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw InvalidArgument("PulseEnvelope: fwhm must be finite and > 0");
    return fwhm;
  }

  PulseShape shape_;
  double fwhm_;
  double duration_;
};

/// A = ∫α dω / (∫|α|² dω)^{1/2}, the factor in the narrow-pulse limit
/// (α∗ρ)/√(|α|²∗ρ) → A√ρ. The odd imaginary parts of the Lorentzian and
/// rectangular envelopes integrate to zero (principal value).
inline double pulse_constant_A(const PulseEnvelope& env) {
  constexpr double pi = std::numbers::pi;
  switch (env.shape()) {
    case PulseShape::lorentzian:
      return std::sqrt(pi * env.fwhm() / 2.0);
    case PulseShape::gaussian:
      return std::sqrt(std::sqrt(pi / std::numbers::ln2) * env.fwhm());
    case PulseShape::rectangular:
      return std::sqrt(pi / (2.0 * env.duration()));
  }
  return 0.0;
}

}  // namespace qesr
