#pragma once

// The two experiments built on the cavity + ensemble response: the
// single-photon swap oscillation and the qubit-detected ESR spectrum. The
// cavity→qubit transfer and the qubit readout are scalar efficiencies.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qesr/contour.hpp"
#include "qesr/dynamics.hpp"
#include "qesr/errors.hpp"
#include "qesr/io.hpp"
#include "qesr/parallel.hpp"
#include "qesr/pulse.hpp"
#include "qesr/spin_model.hpp"

namespace qesr {

struct QubitChain {
  double swap_efficiency = 0.7;
  double readout_fidelity = 0.7;
  /// Largest allowed mean photon number n_p|β|² reaching the cavity.
  double saturation_guard = 1.0;
  /// Additive readout dark-count level.
  double baseline = 0.0;

  void validate() const {
    auto unit = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string("QubitChain: ") + name + " must lie in [0, 1]");
    };
    unit(swap_efficiency, "swap_efficiency");
    unit(readout_fidelity, "readout_fidelity");
    unit(saturation_guard, "saturation_guard");
    unit(baseline, "baseline");
  }

  /// P_e per cavity photon.
  double scale() const noexcept { return swap_efficiency * readout_fidelity; }

  double excited_probability(double photons) const noexcept {
    return std::clamp(scale() * photons + baseline, 0.0, 1.0);
  }
};

struct SwapTrace {
  std::vector<double> tau;
  std::vector<double> cavity_population;  // |⟨a(τ)a†(0)⟩|²
  std::vector<double> p_e;
  /// First minimum of the cavity population; empty when none is resolved.
  std::optional<double> tau_s;
  /// Angular frequency of the cavity-population oscillation, 2π/t_return
  /// (π/τ_s when the photon does not return inside the grid).
  std::optional<double> oscillation_frequency;
  std::optional<double> return_time;
  std::optional<double> return_p_e;
  std::vector<std::string> warnings;
};

namespace detail {

struct Extremum {
  double position;
  double value;
};

/// Vertex of the parabola through three equally spaced samples around i.
inline Extremum parabolic_vertex(std::span<const double> x, std::span<const double> y, std::size_t i) {
  const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom == 0.0) return {x[i], y1};
  const double h = 0.5 * (x[i + 1] - x[i - 1]);
  const double u = std::clamp(0.5 * (y0 - y2) / denom, -1.0, 1.0);
  return {x[i] + u * h, y1 - 0.25 * (y0 - y2) * u};
}

/// First strict local minimum (min) or maximum (!min) at index > start.
inline std::optional<std::size_t> first_extremum(std::span<const double> y, std::size_t start, bool minimum) {
  for (std::size_t i = std::max<std::size_t>(start, 1); i + 1 < y.size(); ++i) {
    const bool lower = minimum ? (y[i] <= y[i - 1] && y[i] < y[i + 1]) : (y[i] >= y[i - 1] && y[i] > y[i + 1]);
    if (lower) return i;
  }
  return std::nullopt;
}

/// Smallest return-peak rise, relative to the initial cavity population,
/// that counts as an oscillation.
inline constexpr double min_return = 1e-3;

inline void validate_tau_grid(std::span<const double> tau, double g_collective) {
  if (tau.size() < 3) throw InvalidArgument("swap: tau grid needs at least 3 points");
  double widest = 0.0;
  for (std::size_t i = 1; i < tau.size(); ++i) {
    const double dt = tau[i] - tau[i - 1];
    if (!(dt > 0.0)) throw InvalidArgument("swap: tau grid must be strictly increasing");
    widest = std::max(widest, dt);
  }
  if (tau.front() < 0.0) throw InvalidArgument("swap: tau grid must start at or after 0");
  if (g_collective > 0.0) {
    const double period = std::numbers::pi / g_collective;
    if (widest > period / 10.0)
      throw GridTooCoarseError("swap: tau spacing " + std::to_string(widest) + " s exceeds 1/10 of the period " +
                               std::to_string(period) + " s");
  }
}

}  // namespace detail

/// Swap oscillation of a photon starting in the cavity. τ_s is the first
/// minimum of |⟨a(τ)a†(0)⟩|², the return is the next maximum.
inline SwapTrace simulate_swap(const SpinDistribution& dist, const CavityModel& cav, const QubitChain& qubit,
                               std::span<const double> tau, const ContourOptions& opts = {}) {
  qubit.validate();
  detail::validate_tau_grid(tau, dist.g_collective());
  const auto response = invert_cavity_response(dist, cav, tau, opts);

  SwapTrace trace;
  trace.tau.assign(tau.begin(), tau.end());
  trace.cavity_population.resize(tau.size());
  trace.p_e.resize(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    trace.cavity_population[i] = std::norm(response.beta[i]);
    trace.p_e[i] = qubit.excited_probability(trace.cavity_population[i]);
  }
  if (dist.g_collective() == 0.0) {
    trace.warnings.emplace_back("g_collective is zero: the photon does not couple to the spins");
    return trace;
  }

  const auto pop = std::span<const double>(trace.cavity_population);
  const auto min_index = detail::first_extremum(pop, 1, true);
  if (!min_index) {
    trace.warnings.emplace_back("no cavity-population minimum inside the tau grid");
    return trace;
  }
  trace.tau_s = detail::parabolic_vertex(tau, pop, *min_index).position;
  const auto max_index = detail::first_extremum(pop, *min_index + 1, false);
  // An overdamped cavity field also passes through zero once, but the
  // photon never comes back.
  if (max_index && pop[*max_index] - pop[*min_index] >= detail::min_return * pop[0]) {
    const auto peak = detail::parabolic_vertex(tau, pop, *max_index);
    trace.return_time = peak.position;
    trace.return_p_e = qubit.excited_probability(peak.value);
    trace.oscillation_frequency = 2.0 * std::numbers::pi / peak.position;
  } else {
    if (max_index) trace.warnings.emplace_back("photon return below 1e-3 of the initial population: overdamped");
    trace.oscillation_frequency = std::numbers::pi / *trace.tau_s;
  }
  return trace;
}

struct SwapSearchOptions {
  /// Grid points per vacuum Rabi half period π/g_K.
  std::size_t points_per_period = 400;
  /// Search span in units of π/g_K.
  double periods = 3.0;
  ContourOptions contour;
};

/// First time of maximal transfer into the spins.
inline double find_swap_time(const SpinDistribution& dist, const CavityModel& cav,
                             const SwapSearchOptions& search = {}) {
  const double g = dist.g_collective();
  if (!(g > 0.0)) throw OscillationNotFound("find_swap_time: g_collective is zero");
  const double period = std::numbers::pi / g;
  const auto n = static_cast<std::size_t>(std::ceil(search.periods * static_cast<double>(search.points_per_period)));
  std::vector<double> tau(n + 1);
  for (std::size_t i = 0; i <= n; ++i) tau[i] = search.periods * period * static_cast<double>(i) / static_cast<double>(n);
  const auto trace = simulate_swap(dist, cav, QubitChain{}, tau, search.contour);
  if (!trace.tau_s || !trace.return_time)
    throw OscillationNotFound("find_swap_time: no photon return within " + std::to_string(search.periods) +
                              " half periods (overdamped regime)");
  return *trace.tau_s;
}

/// Same with the cavity tuned to the named ensemble's line center.
inline double find_swap_time(const EnsembleCatalog& catalog, CavityModel cav, std::string_view name,
                             const SwapSearchOptions& search = {}) {
  const auto& ensemble = catalog.at(name);
  cav.omega_c = ensemble.omega_center;
  return find_swap_time(ensemble.distribution, cav, search);
}

struct SpectrumPeak {
  double omega = 0.0;  // rad/s
  double p_e = 0.0;
};

struct SpectrumResult {
  std::vector<double> omega_p;
  std::vector<double> p_e;
  std::vector<double> abs2_beta;
  double tau_s = 0.0;
  double n_excitations_peak = 0.0;
  /// P_e per unit |β|²: n_p · swap_efficiency · readout_fidelity.
  double scale = 0.0;
  TransferMode mode = TransferMode::narrow_pulse;
  std::vector<SpectrumPeak> peaks;
  std::vector<std::string> warnings;
};

namespace detail {

/// Local maxima of y above baseline holding at least `fraction` of the
/// largest excursion, refined parabolically.
inline std::vector<SpectrumPeak> find_peaks(std::span<const double> x, std::span<const double> y, double baseline,
                                            double fraction = 0.05) {
  std::vector<SpectrumPeak> peaks;
  double top = 0.0;
  for (double v : y) top = std::max(top, v - baseline);
  if (!(top > 0.0)) return peaks;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] - baseline >= fraction * top) {
      const auto v = parabolic_vertex(x, y, i);
      peaks.push_back({v.position, v.value});
    }
  }
  return peaks;
}

/// β(ω_p, τ) for every sweep point.
inline std::vector<cplx> transfer_at(const SpinDistribution& dist, const CavityModel& cav, const PulseEnvelope& env,
                                     std::span<const double> sweep, double tau, TransferMode mode, unsigned threads,
                                     const ContourOptions& opts) {
  std::vector<cplx> beta(sweep.size());
  if (mode == TransferMode::resolvent) {
    const auto row = resolvent_row(dist, cav, tau, opts);
    parallel_for(sweep.size(), threads, [&](std::size_t i) {
      const auto c = excitation_coefficients(dist, env, sweep[i]);
      cplx sum = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) sum += row[k] * c[k];
      beta[i] = sum;
    });
    return beta;
  }
  const auto [lo, hi] = std::minmax_element(sweep.begin(), sweep.end());
  const std::vector<double> probes{*lo - cav.omega_c, *hi - cav.omega_c};
  const EmitterResponse response(dist, cav, tau, probes, opts);
  parallel_for(sweep.size(), threads, [&](std::size_t i) {
    const cplx f = pulse_overlap_factor(dist, env, sweep[i], mode);
    beta[i] = dist.g_collective() * f * response(sweep[i] - cav.omega_c);
  });
  return beta;
}

}  // namespace detail

/// P_e(ω_p) = readout_fidelity · swap_efficiency · n_p |β(ω_p, τ_s)|² + baseline,
/// clipped to [0, 1]. Throws SaturationGuardError at the first sweep point
/// where n_p|β|² exceeds the guard.
inline SpectrumResult esr_spectrum(const SpinDistribution& dist, const CavityModel& cav, const PulseEnvelope& env,
                                   const QubitChain& qubit, std::span<const double> sweep, double tau_s, double n_p,
                                   TransferMode mode = TransferMode::narrow_pulse, unsigned threads = 1,
                                   const ContourOptions& opts = {}) {
  qubit.validate();
  cav.validate();
  if (sweep.empty()) throw InvalidArgument("esr_spectrum: sweep is empty");
  for (double w : sweep)
    if (!std::isfinite(w)) throw InvalidArgument("esr_spectrum: sweep frequencies must be finite");
  if (!(tau_s >= 0.0) || !std::isfinite(tau_s)) throw InvalidArgument("esr_spectrum: tau_s must be finite and >= 0");
  if (!(n_p >= 0.0) || !std::isfinite(n_p)) throw InvalidArgument("esr_spectrum: n_p must be finite and >= 0");

  SpectrumResult result;
  result.omega_p.assign(sweep.begin(), sweep.end());
  result.tau_s = tau_s;
  result.n_excitations_peak = n_p;
  result.scale = n_p * qubit.scale();
  result.mode = mode;
  if (mode == TransferMode::narrow_pulse)
    if (auto w = narrow_pulse_warning(dist, env)) result.warnings.push_back(*w);

  const auto beta = detail::transfer_at(dist, cav, env, sweep, tau_s, mode, threads, opts);
  result.abs2_beta.resize(sweep.size());
  result.p_e.resize(sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    result.abs2_beta[i] = std::norm(beta[i]);
    const double photons = n_p * result.abs2_beta[i];
    if (photons > qubit.saturation_guard)
      throw SaturationGuardError("esr_spectrum: n_p|beta|^2 = " + std::to_string(photons) + " exceeds the guard " +
                                     std::to_string(qubit.saturation_guard) + " at omega_p = " +
                                     std::to_string(sweep[i]) + " rad/s",
                                 sweep[i], photons);
    result.p_e[i] = qubit.excited_probability(photons);
  }
  result.peaks = detail::find_peaks(result.omega_p, result.p_e, qubit.baseline);
  return result;
}

struct ExcitationBudget {
  double n_bp_mode = 0.0;      // excitations put into b_ωp
  double n_transferred = 0.0;  // n_p |β(ω_p, τ_s)|²
  double ratio = 0.0;          // n_bp_mode / n_transferred
};

inline ExcitationBudget excitation_budget(const SpinDistribution& dist, const CavityModel& cav,
                                          const PulseEnvelope& env, double n_p, double omega_p, double tau_s,
                                          TransferMode mode = TransferMode::narrow_pulse,
                                          const ContourOptions& opts = {}) {
  if (!(n_p > 0.0)) throw InvalidArgument("excitation_budget: n_p must be > 0");
  const std::vector<double> sweep{omega_p};
  const auto beta = detail::transfer_at(dist, cav, env, sweep, tau_s, mode, 1, opts);
  ExcitationBudget b;
  b.n_bp_mode = n_p;
  b.n_transferred = n_p * std::norm(beta[0]);
  b.ratio = b.n_transferred > 0.0 ? n_p / b.n_transferred : std::numeric_limits<double>::infinity();
  return b;
}

/// CSV with header `tau_s,cavity_population,p_e`.
inline void write_swap_csv(std::ostream& out, const SwapTrace& trace) {
  out << "tau_s,cavity_population,p_e\n";
  for (std::size_t i = 0; i < trace.tau.size(); ++i)
    detail::write_row(out, {trace.tau[i], trace.cavity_population[i], trace.p_e[i]});
}

/// CSV with header `omega_p_rad_per_s,frequency_hz,p_e,abs2_beta`.
inline void write_spectrum_csv(std::ostream& out, const SpectrumResult& result) {
  out << "omega_p_rad_per_s,frequency_hz,p_e,abs2_beta\n";
  for (std::size_t i = 0; i < result.omega_p.size(); ++i)
    detail::write_row(out, {result.omega_p[i], result.omega_p[i] / (2.0 * std::numbers::pi), result.p_e[i],
                            result.abs2_beta[i]});
}

}  // namespace qesr
