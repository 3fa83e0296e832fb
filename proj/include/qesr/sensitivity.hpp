#pragma once

// Weak-coupling sensitivity of a qubit-detected ESR spectrometer. After a
// π/2 pulse ⟨S₋⟩ = (N/2)e^{−Δt} and, neglecting back-action,
//
//   d⟨a⟩/dt = −(κ/2)⟨a⟩ − i g ⟨S₋⟩
//   ⟨a⟩(t)  = −i g N (e^{−κt/2} − e^{−Δt}) / (2Δ − κ).
//
// For κ ≪ Δ the field peaks at n̄ = g²N²/(4Δ²) photons.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "qesr/errors.hpp"

namespace qesr {

struct WeakCouplingScenario {
  double g = 0.0;      // per-spin coupling, rad/s
  double n_spins = 0.0;
  double delta = 0.0;  // decay rate of ⟨S₋⟩, rad/s
  double kappa = 0.0;  // rad/s
  double n_threshold = 0.05;

  void validate() const {
    if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("WeakCouplingScenario: g must be finite and > 0");
    if (!(n_spins > 0.0) || !std::isfinite(n_spins)) throw InvalidArgument("WeakCouplingScenario: N must be > 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("WeakCouplingScenario: delta must be > 0");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("WeakCouplingScenario: kappa must be > 0");
    if (!(n_threshold > 0.0)) throw InvalidArgument("WeakCouplingScenario: n_threshold must be > 0");
  }

  /// g√N < κ/10 and κ < Δ/10.
  bool weak_coupling() const noexcept { return g * std::sqrt(n_spins) < kappa / 10.0 && kappa < delta / 10.0; }

  std::vector<std::string> regime_warnings() const {
    std::vector<std::string> w;
    if (!(g * std::sqrt(n_spins) < kappa / 10.0)) w.emplace_back("g*sqrt(N) >= kappa/10: not in the weak-coupling limit");
    if (!(kappa < delta / 10.0)) w.emplace_back("kappa >= delta/10: not in the weak-coupling limit");
    return w;
  }
};

/// Δ of a line of magnetic-field width `linewidth_tesla` for a spin with
/// gyromagnetic ratio `hz_per_tesla` (2.8e10 Hz/T for g ≈ 2).
inline double delta_from_linewidth(double linewidth_tesla, double hz_per_tesla = 2.8e10) {
  if (!(linewidth_tesla > 0.0) || !(hz_per_tesla > 0.0))
    throw InvalidArgument("delta_from_linewidth: linewidth and gyromagnetic ratio must be > 0");
  return 2.0 * std::numbers::pi * hz_per_tesla * linewidth_tesla;
}

/// ⟨a⟩(t), written with expm1 so that nearby rates do not cancel.
inline std::complex<double> mean_field_amplitude(const WeakCouplingScenario& s, double t) {
  const double x = s.delta - 0.5 * s.kappa;  // (2Δ − κ)/2
  const double front = s.g * s.n_spins * std::exp(-0.5 * s.kappa * t);
  double ratio;  // (1 − e^{−xt}) / (2x)
  if (std::abs(2.0 * x) < 1e-6 * s.delta)
    ratio = 0.5 * t * (1.0 - 0.5 * x * t);
  else
    ratio = -std::expm1(-x * t) / (2.0 * x);
  return {0.0, -front * ratio};
}

inline std::vector<std::complex<double>> mean_field_trajectory(const WeakCouplingScenario& s,
                                                               std::span<const double> times) {
  s.validate();
  std::vector<std::complex<double>> a(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0)) throw InvalidArgument("mean_field_trajectory: times must be >= 0");
    a[i] = mean_field_amplitude(s, times[i]);
  }
  return a;
}

struct PeakPhotonNumber {
  double closed_form = 0.0;  // g²N²/(4Δ²)
  double numeric = 0.0;      // max_t |⟨a⟩(t)|²
  double t_peak = 0.0;
  std::vector<std::string> warnings;
};

inline PeakPhotonNumber peak_photon_number(const WeakCouplingScenario& s) {
  s.validate();
  PeakPhotonNumber p;
  p.warnings = s.regime_warnings();
  p.closed_form = s.g * s.g * s.n_spins * s.n_spins / (4.0 * s.delta * s.delta);
  // |⟨a⟩|² rises from 0 and decays to 0 with a single maximum inside
  // [0, 20/slowest rate]. The search runs in u = Δt because Brent's stopping
  // rule has an absolute term that would swamp times in seconds.
  const double slow = std::min(s.delta, 0.5 * s.kappa);
  const double u_hi = 20.0 * s.delta / slow;
  auto negative = [&](double u) { return -std::norm(mean_field_amplitude(s, u / s.delta)); };
  const auto [u, v] = boost::math::tools::brent_find_minima(negative, 0.0, u_hi, std::numeric_limits<double>::digits / 2);
  p.t_peak = u / s.delta;
  p.numeric = -v;
  return p;
}

/// N_min = (2Δ/g)√n_threshold.
inline double min_detectable_spins(double g, double delta, double n_threshold) {
  if (!(g > 0.0) || !(delta > 0.0) || !(n_threshold > 0.0))
    throw InvalidArgument("min_detectable_spins: g, delta and n_threshold must be > 0");
  return 2.0 * delta / g * std::sqrt(n_threshold);
}

}  // namespace qesr
