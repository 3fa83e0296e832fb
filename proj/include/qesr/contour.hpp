#pragma once

// Numerical inverse Laplace transform of the frequency-domain responses.
//
// With s = −iω the Bromwich line Re s = ε is the horizontal line Im ω = ε:
//
//   β(t) = (1/2π) ∫ e^{−i z t} T(z) dz,   z = x + iε,
//        = f_ref(t) + e^{εt} (h/2π) Σ_m w_m e^{−i x_m t} [T(z_m) − T_ref(z_m)].
//
// Every singularity of T lies on or below the real axis, so any ε > 0 gives
// the exact integral; lifting the line off the axis keeps the integrand
// smooth even for lossless ensembles and undamped pole at ω_p. T_ref is a
// rational function with the same large-|z| tail and a closed-form inverse
// f_ref, so the sum only carries the fast-decaying remainder. The
// trapezoidal sum has aliasing error ~e^{−2πε/h}; h = ε/5 makes it ~1e−14.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qesr/dynamics.hpp"
#include "qesr/errors.hpp"

namespace qesr {

/// Zero selects the automatic value.
struct ContourOptions {
  double half_width = 0.0;  // Ω: x ∈ [−Ω, Ω] around the cavity, rad/s
  double step = 0.0;        // h, rad/s; default shift/5
  double shift = 0.0;       // ε = Im z of the contour, rad/s; default 1/t_max
  double edge_tolerance = 1e-4;
  /// Bound on the estimated truncated mass e^{εt}(Ω/π)|T − T_ref|(±Ω), which
  /// is an absolute error on β since |β| ≤ 1.
  double truncation_tolerance = 1e-6;
  std::size_t max_points = std::size_t{1} << 24;

  void validate() const {
    if (!(half_width >= 0.0) || !(step >= 0.0) || !(shift >= 0.0))
      throw InvalidArgument("ContourOptions: half_width, step and shift must be >= 0");
    if (!(edge_tolerance > 0.0 && edge_tolerance < 1.0))
      throw InvalidArgument("ContourOptions: edge_tolerance must lie in (0, 1)");
    if (!(truncation_tolerance > 0.0)) throw InvalidArgument("ContourOptions: truncation_tolerance must be > 0");
  }
};

namespace detail {

struct ContourPlan {
  double shift = 0.0;
  double step = 0.0;
  double half_width = 0.0;
  std::size_t count = 0;

  double x(std::size_t m) const noexcept { return -half_width + static_cast<double>(m) * step; }
  cplx z(std::size_t m) const noexcept { return {x(m), shift}; }
  double weight(std::size_t m) const noexcept { return (m == 0 || m + 1 == count) ? 0.5 : 1.0; }
};

/// T_ref(z) = c1/(z − p1) + c2/((z − p1)(z − p2)) with both poles below the contour.
struct Tail {
  cplx c1 = 0.0;
  cplx c2 = 0.0;
  cplx p1 = 0.0;
  cplx p2 = 0.0;

  cplx operator()(cplx z) const { return (c1 + c2 / (z - p2)) / (z - p1); }

  cplx inverse(double t) const {
    const cplx i(0.0, 1.0);
    const cplx e1 = std::exp(-i * p1 * t);
    const cplx e2 = std::exp(-i * p2 * t);
    return -i * c1 * e1 - i * c2 * (e1 - e2) / (p1 - p2);
  }
};

/// Cavity pole p1 and an auxiliary pole p2 = Re p1 − i(κ/2 + rate).
inline Tail make_tail(const Frame& frame, cplx c1, cplx c2, double rate) {
  const cplx p1 = frame.cavity_pole();
  return {c1, c2, p1, cplx(p1.real(), p1.imag() - rate)};
}

/// Σ_m w_m e^{−i x_m t} v_m, phases by rotation re-anchored every 256 terms.
inline cplx fourier_sum(const ContourPlan& plan, std::span<const cplx> v, double t) {
  const cplx rot = std::polar(1.0, -plan.step * t);
  cplx acc = 0.0;
  cplx phase;
  for (std::size_t m = 0; m < plan.count; ++m) {
    if (m % 256 == 0) phase = std::polar(1.0, -plan.x(m) * t);
    acc += plan.weight(m) * phase * v[m];
    phase *= rot;
  }
  return acc;
}

inline double default_shift(const ContourOptions& opts, double t_max, double rate_scale) {
  if (opts.shift > 0.0) return opts.shift;
  if (t_max > 0.0) return 1.0 / t_max;
  return rate_scale > 0.0 ? rate_scale : 1.0;
}

inline ContourPlan make_plan(const ContourOptions& opts, double shift, double half_width) {
  ContourPlan plan;
  plan.shift = shift;
  plan.step = opts.step > 0.0 ? opts.step : shift / 5.0;
  if (plan.step > shift / 2.0)
    throw InvalidArgument("ContourOptions: step must not exceed shift/2 (aliasing)");
  plan.half_width = half_width;
  const double n = std::ceil(2.0 * half_width / plan.step);
  if (!(n + 1.0 <= static_cast<double>(opts.max_points)))
    throw MemoryBudgetError("contour: " + std::to_string(n) + " quadrature points exceed max_points");
  plan.count = static_cast<std::size_t>(n) + 1;
  plan.step = 2.0 * half_width / n;
  return plan;
}

/// Largest |v| at the two window edges relative to the largest |v| overall.
inline double edge_ratio(std::span<const cplx> v) {
  double peak = 0.0;
  for (const auto& s : v) peak = std::max(peak, std::abs(s));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(v.front()), std::abs(v.back())) / peak;
}

struct SampledContour {
  ContourPlan plan;
  std::vector<cplx> residual;  // T(z_m) − T_ref(z_m)
};

enum class EdgeCheck { transfer, residual };

/// Samples T on the contour. An automatic window grows by 1.5 until the edge
/// criterion holds; a user window that fails it throws.
template <class Transfer>
SampledContour sample_contour(const Transfer& transfer, const Tail& tail, const ContourOptions& opts, double shift,
                              double initial_half_width, EdgeCheck check, double t_max) {
  double half_width = opts.half_width > 0.0 ? opts.half_width : initial_half_width;
  for (;;) {
    SampledContour out{make_plan(opts, shift, half_width), {}};
    std::vector<cplx> value(out.plan.count);
    out.residual.resize(out.plan.count);
    for (std::size_t m = 0; m < out.plan.count; ++m) {
      const cplx z = out.plan.z(m);
      value[m] = transfer(z);
      out.residual[m] = value[m] - tail(z);
    }
    double ratio;
    if (check == EdgeCheck::transfer) {
      ratio = edge_ratio(value);
    } else {
      double peak = 0.0;
      for (const auto& s : value) peak = std::max(peak, std::abs(s));
      ratio = peak == 0.0 ? 0.0
                          : std::max(std::abs(out.residual.front()), std::abs(out.residual.back())) / peak;
    }
    const double truncated = std::exp(shift * t_max) * half_width / std::numbers::pi *
                             std::max(std::abs(out.residual.front()), std::abs(out.residual.back()));
    if (ratio <= opts.edge_tolerance && truncated <= opts.truncation_tolerance) return out;
    if (opts.half_width > 0.0)
      throw WindowTooSmallError("contour: window edge holds " + std::to_string(ratio) +
                                " of the peak and an estimated truncation error " + std::to_string(truncated));
    half_width *= 1.5;
  }
}

inline double rate_scale(const Frame& frame, double extra = 0.0) {
  return std::max({frame.g_collective(), 2.0 * frame.half_kappa(), 2.0 * frame.half_gamma(), extra});
}

/// β(t) = f_ref(t) + e^{εt}(h/2π) Σ w_m e^{−i x_m t} residual_m.
inline std::vector<cplx> invert(const SampledContour& sc, const Tail& tail, std::span<const double> times) {
  std::vector<cplx> beta(times.size());
  const double scale = sc.plan.step / (2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    beta[i] = tail.inverse(t) + std::exp(sc.plan.shift * t) * scale * fourier_sum(sc.plan, sc.residual, t);
  }
  return beta;
}

inline double max_time(std::span<const double> times) {
  return *std::max_element(times.begin(), times.end());
}

}  // namespace detail

/// β(ω_p, t) = ⟨a(t) b†_ωp(0)⟩ by contour inversion of transfer_spectrum_t.
/// The default mode is the exact resolvent, the counterpart of
/// time_domain_propagate; the narrow-pulse and exact-convolution modes
/// collapse the excited spins onto ω_p.
inline TransferResult invert_to_time(const SpinDistribution& dist, const CavityModel& cav, const PulseEnvelope& env,
                                     double omega_p, std::span<const double> times,
                                     TransferMode mode = TransferMode::resolvent, const ContourOptions& opts = {}) {
  cav.validate();
  opts.validate();
  detail::validate_times(times);
  const detail::Frame frame(dist, cav, cav.omega_c);
  const cplx i(0.0, 1.0);
  const double xp = omega_p - cav.omega_c;

  TransferResult result;
  result.omega_p = omega_p;
  result.frame = cav.omega_c;
  result.times.assign(times.begin(), times.end());
  result.method = TransferMethod::contour;
  if (mode == TransferMode::narrow_pulse)
    if (auto w = narrow_pulse_warning(dist, env)) result.warnings.push_back(*w);

  std::vector<cplx> c;
  cplx source = 0.0;  // Σ_k c_k g_k
  if (mode == TransferMode::resolvent) {
    c = excitation_coefficients(dist, env, omega_p);
    const auto g = frame.couplings();
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] *= g[k];
      source += c[k];
    }
  } else {
    source = dist.g_collective() * pulse_overlap_factor(dist, env, omega_p, mode);
  }

  const auto d = frame.detuning();
  const double hg = frame.half_gamma();
  auto transfer = [&](cplx z) -> cplx {
    const cplx t1 = frame.cavity_amplitude(z);
    if (mode == TransferMode::resolvent) {
      cplx sum = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) sum += c[k] * detail::inverse(z.real() - d[k], z.imag() + hg);
      return i * t1 * sum;
    }
    return i * source * t1 * detail::inverse(z.real() - xp, z.imag() + hg);
  };

  double rate = detail::rate_scale(frame, env.fwhm());
  const double shift = detail::default_shift(opts, detail::max_time(times), rate);
  rate = std::max(rate, shift);  // keeps the window and the tail poles apart when g = κ = 0
  const auto tail = detail::make_tail(frame, 0.0, -source, rate);
  const double start = std::max(frame.extent(), std::abs(xp)) + 10.0 * rate;
  const auto sc = detail::sample_contour(transfer, tail, opts, shift, start, detail::EdgeCheck::transfer,
                                         detail::max_time(times));
  result.beta = detail::invert(sc, tail, times);
  return result;
}

/// ⟨a(t) a†(0)⟩ for a photon starting in the cavity, by contour inversion of
/// t₁. t₁ decays only as i/z, so the edge criterion is applied to the
/// remainder after the 1/z tail is removed.
inline TransferResult invert_cavity_response(const SpinDistribution& dist, const CavityModel& cav,
                                             std::span<const double> times, const ContourOptions& opts = {}) {
  cav.validate();
  opts.validate();
  detail::validate_times(times);
  const detail::Frame frame(dist, cav, cav.omega_c);
  double rate = detail::rate_scale(frame);
  const double shift = detail::default_shift(opts, detail::max_time(times), rate);
  rate = std::max(rate, shift);
  const auto tail = detail::make_tail(frame, cplx(0.0, 1.0), 0.0, rate);
  auto transfer = [&](cplx z) { return frame.cavity_amplitude(z); };
  const auto sc = detail::sample_contour(transfer, tail, opts, shift, frame.extent() + 10.0 * rate,
                                         detail::EdgeCheck::residual, detail::max_time(times));
  TransferResult result;
  result.omega_p = cav.omega_c;
  result.frame = cav.omega_c;
  result.times.assign(times.begin(), times.end());
  result.method = TransferMethod::contour;
  result.beta = detail::invert(sc, tail, times);
  return result;
}

/// Cavity response at a fixed delay τ to a unit-coupled emitter at detuning
/// d from the cavity: R(d, τ) = L⁻¹[i t₁(z)/(z − d + iγ₀/2)](τ). Then
///   ⟨a(τ) b†_k(0)⟩ = g_k R(d_k, τ)  and  β_narrow(ω_p, τ) = g_K F(ω_p) R(ω_p − ω_c, τ).
/// t₁ is sampled once, so each evaluation costs one pass over the contour.
class EmitterResponse {
 public:
  /// `probes` are detunings (rad/s, from ω_c) the window must accommodate.
  EmitterResponse(const SpinDistribution& dist, const CavityModel& cav, double tau, std::span<const double> probes,
                  const ContourOptions& opts = {})
      : frame_((cav.validate(), detail::Frame(dist, cav, cav.omega_c))), tau_(tau), opts_(opts) {
    opts.validate();
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidArgument("EmitterResponse: tau must be finite and >= 0");
    double rate = detail::rate_scale(frame_);
    const double shift = detail::default_shift(opts, tau, rate);
    rate = std::max(rate, shift);
    tail_ = detail::make_tail(frame_, 0.0, -1.0, rate);
    double extent = frame_.extent();
    for (double p : probes) extent = std::max(extent, std::abs(p));
    double half_width = opts.half_width > 0.0 ? opts.half_width : extent + 10.0 * rate;
    for (;;) {
      sample(detail::make_plan(opts, shift, half_width));
      bool ok = true;
      for (double p : probes) ok = ok && edge_ok(p);
      if (ok) break;
      if (opts.half_width > 0.0)
        throw WindowTooSmallError("EmitterResponse: window too small for the requested detunings");
      half_width *= 1.5;
    }
  }

  double tau() const noexcept { return tau_; }
  const detail::Frame& frame() const noexcept { return frame_; }

  cplx operator()(double detuning) const {
    if (!edge_ok(detuning))
      throw WindowTooSmallError("EmitterResponse: detuning " + std::to_string(detuning) +
                                " rad/s lies outside the resolved window");
    const cplx i(0.0, 1.0);
    const double hg = frame_.half_gamma();
    cplx acc = 0.0;
    for (std::size_t m = 0; m < plan_.count; ++m) {
      const cplx v = i * t1_[m] * detail::inverse(plan_.x(m) - detuning, plan_.shift + hg);
      acc += phase_[m] * v;
    }
    acc -= tail_sum_;
    return tail_.inverse(tau_) + std::exp(plan_.shift * tau_) * plan_.step / (2.0 * std::numbers::pi) * acc;
  }

 private:
  void sample(const detail::ContourPlan& plan) {
    plan_ = plan;
    t1_.resize(plan.count);
    phase_.resize(plan.count);
    tail_sum_ = 0.0;
    for (std::size_t m = 0; m < plan.count; ++m) {
      const cplx z = plan.z(m);
      t1_[m] = frame_.cavity_amplitude(z);
      phase_[m] = plan.weight(m) * std::polar(1.0, -plan.x(m) * tau_);
      tail_sum_ += phase_[m] * tail_(z);
    }
  }

  bool edge_ok(double detuning) const {
    const cplx i(0.0, 1.0);
    const double hg = frame_.half_gamma();
    auto value = [&](std::size_t m) {
      return std::abs(i * t1_[m] * detail::inverse(plan_.x(m) - detuning, plan_.shift + hg));
    };
    double peak = 0.0;
    for (std::size_t m = 0; m < plan_.count; ++m) peak = std::max(peak, value(m));
    if (std::max(value(0), value(plan_.count - 1)) > opts_.edge_tolerance * peak) return false;
    // β = g R with g ≤ g_K, so the truncation bound on R carries a factor g_K.
    auto residual = [&](std::size_t m) {
      return std::abs(i * t1_[m] * detail::inverse(plan_.x(m) - detuning, plan_.shift + hg) - tail_(plan_.z(m)));
    };
    const double truncated = frame_.g_collective() * std::exp(plan_.shift * tau_) * plan_.half_width /
                             std::numbers::pi * std::max(residual(0), residual(plan_.count - 1));
    return truncated <= opts_.truncation_tolerance;
  }

  detail::Frame frame_;
  double tau_;
  ContourOptions opts_;
  detail::Tail tail_;
  detail::ContourPlan plan_;
  std::vector<cplx> t1_;
  std::vector<cplx> phase_;
  cplx tail_sum_ = 0.0;
};

/// r_k(τ) = ⟨a(τ) b†_k(0)⟩ for every node; β(τ) = Σ_k r_k c_k for any spin state.
inline std::vector<cplx> resolvent_row(const SpinDistribution& dist, const CavityModel& cav, double tau,
                                       const ContourOptions& opts = {}) {
  const auto omega = dist.node_frequencies();
  const std::vector<double> probes{omega.front() - cav.omega_c, omega.back() - cav.omega_c};
  const EmitterResponse response(dist, cav, tau, probes, opts);
  const auto d = response.frame().detuning();
  const auto g = response.frame().couplings();
  std::vector<cplx> row(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) row[k] = g[k] * response(d[k]);
  return row;
}

}  // namespace qesr
