#pragma once

#include <vector>

#include "qesr/qesr.hpp"

namespace qesr::test {

inline constexpr double MHz = 1e6;
inline constexpr double kHz = 1e3;
inline constexpr double ns = 1e-9;

struct ReferenceEnsemble {
  const char* name;
  double center_hz;
  double fwhm_hz;
  double g_hz;
};

inline constexpr ReferenceEnsemble plus_I{"+I", 2.91e9, 1.6 * MHz, 2.9 * MHz};
inline constexpr ReferenceEnsemble plus_III{"+III", 2.89e9, 2.4 * MHz, 3.8 * MHz};
inline constexpr double hyperfine_splitting_hz = 2.2 * MHz;
inline constexpr double pulse_fwhm_hz = 150 * kHz;
inline constexpr double quality_factor = 1e4;

inline DistributionSpec triplet_spec(const ReferenceEnsemble& e, std::size_t n_nodes = 5000) {
  DistributionSpec spec;
  const double c = hz_to_angular(e.center_hz);
  for (double k : {-1.0, 0.0, 1.0})
    spec.lines.push_back({c + k * hz_to_angular(hyperfine_splitting_hz), hz_to_angular(e.fwhm_hz), 1.0});
  spec.g_collective = hz_to_angular(e.g_hz);
  spec.n_nodes = n_nodes;
  return spec;
}

inline SpinDistribution triplet(const ReferenceEnsemble& e, std::size_t n_nodes = 5000) {
  return build_distribution(triplet_spec(e, n_nodes));
}

/// Cavity tuned to the ensemble center with κ = ω_c/Q.
inline CavityModel tuned_cavity(const ReferenceEnsemble& e) {
  return CavityModel::from_quality(hz_to_angular(e.center_hz), quality_factor);
}

inline PulseEnvelope reference_pulse() { return PulseEnvelope::lorentzian(hz_to_angular(pulse_fwhm_hz)); }

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

/// All spins at one frequency: a single node carrying the whole coupling.
inline SpinDistribution degenerate(double omega, double g) { return SpinDistribution::from_nodes({omega}, {1.0}, g); }

}  // namespace qesr::test
