// Swap time and a coarse ESR spectrum for a hyperfine triplet.

#include <cstdio>
#include <vector>

#include "qesr/qesr.hpp"

int main() {
  using namespace qesr;
  const double center = hz_to_angular(2.91e9);

  DistributionSpec spec;
  for (double offset : {-2.2e6, 0.0, 2.2e6}) spec.lines.push_back({center + hz_to_angular(offset), hz_to_angular(1.6e6), 1.0});
  spec.g_collective = hz_to_angular(2.9e6);
  const auto dist = build_distribution(spec);
  const auto cav = CavityModel::from_quality(center, 1e4);
  const auto pulse = PulseEnvelope::lorentzian(hz_to_angular(150e3));

  const double tau_s = find_swap_time(dist, cav);
  std::printf("tau_s = %.2f ns\n", tau_s * 1e9);

  std::vector<double> sweep;
  for (int i = -20; i <= 20; ++i) sweep.push_back(center + hz_to_angular(0.2e6 * i));
  const auto spectrum = esr_spectrum(dist, cav, pulse, QubitChain{}, sweep, tau_s, 15.0);
  for (std::size_t i = 0; i < sweep.size(); ++i)
    std::printf("%+6.2f MHz  P_e = %.4f\n", angular_to_hz(sweep[i] - center) * 1e-6, spectrum.p_e[i]);
}
