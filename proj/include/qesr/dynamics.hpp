#pragma once

// Frequency-domain response of the cavity + spin-ensemble system.
//
// The single-excitation dynamics follow dX/dt = −i H_eff X with
//
//            ⎡ ω_c − iκ/2    i g_1        i g_2      … ⎤
//   H_eff =  ⎢ −i g_1        ω_1 − iγ₀/2              ⎥
//            ⎢ −i g_2                     ω_2 − iγ₀/2  ⎥
//            ⎣ ⋮                                     ⋱ ⎦
//
// acting on X = (⟨a(t)·⟩, ⟨b_1(t)·⟩, …). Its resolvent at s = −iω has
//
//   [(s + iH)⁻¹]_00 = t₁(ω) = i / (ω − ω_c + iκ/2 − W(ω)),
//   [(s + iH)⁻¹]_0k = i g_k t₁(ω) / (ω − ω_k + iγ₀/2),
//   W(ω) = Σ_j g_j² / (ω − ω_j + iγ₀/2).
//
// With this sign convention the degenerate lossless ensemble gives
// β(t) = +sin(g_K t) for an excitation starting in the spins.

#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qesr/errors.hpp"
#include "qesr/io.hpp"
#include "qesr/pulse.hpp"
#include "qesr/spin_model.hpp"

namespace qesr {

using cplx = std::complex<double>;

struct CavityModel {
  double omega_c = 0.0;  // rad/s
  double kappa = 0.0;    // energy damping, rad/s
  double gamma_0 = 0.0;  // single-spin emission rate, rad/s

  void validate() const {
    if (!std::isfinite(omega_c)) throw InvalidArgument("CavityModel: omega_c is not finite");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidArgument("CavityModel: kappa must be >= 0");
    if (!(gamma_0 >= 0.0) || !std::isfinite(gamma_0)) throw InvalidArgument("CavityModel: gamma_0 must be >= 0");
  }

  /// κ = ω_c / Q.
  static CavityModel from_quality(double omega_c, double quality, double gamma_0 = 0.0) {
    if (!(quality > 0.0)) throw InvalidArgument("CavityModel: quality factor must be > 0");
    return {omega_c, omega_c / quality, gamma_0};
  }
};

/// How the pulse-excited mode b_ωp enters the transfer function.
enum class TransferMode {
  /// (α∗ρ)/√(|α|²∗ρ) → A√ρ(ω_p), spins collapsed onto ω_p.
  narrow_pulse,
  /// Discrete convolution ratio, spins collapsed onto ω_p.
  exact_convolution,
  /// Σ_k c_k [(s+iH)⁻¹]_0k with every spin at its own frequency. Exact for
  /// the discretized ensemble; this is what the time-domain oracle computes.
  resolvent,
};

inline std::string_view to_string(TransferMode mode) {
  switch (mode) {
    case TransferMode::narrow_pulse: return "narrow-pulse";
    case TransferMode::exact_convolution: return "exact-convolution";
    case TransferMode::resolvent: return "resolvent";
  }
  return "?";
}

namespace detail {

// 1/(re + i im) without the inf/nan bookkeeping of std::complex division.
inline cplx inverse(double re, double im) noexcept {
  const double d = re * re + im * im;
  return {re / d, -im / d};
}

/// Spins and cavity as offsets from a reference frequency. Keeping the
/// large carrier out of every subtraction preserves the small detunings.
class Frame {
 public:
  Frame(const SpinDistribution& dist, const CavityModel& cav, double reference)
      : reference_(reference),
        half_kappa_(0.5 * cav.kappa),
        half_gamma_(0.5 * cav.gamma_0),
        cavity_detuning_(cav.omega_c - reference),
        g_collective_(dist.g_collective()) {
    const auto omega = dist.node_frequencies();
    const auto coupling = dist.node_couplings();
    detuning_.resize(omega.size());
    g2_.resize(omega.size());
    g_.assign(coupling.begin(), coupling.end());
    for (std::size_t j = 0; j < omega.size(); ++j) {
      detuning_[j] = omega[j] - reference;
      g2_[j] = coupling[j] * coupling[j];
    }
  }

  double reference() const noexcept { return reference_; }
  double half_kappa() const noexcept { return half_kappa_; }
  double half_gamma() const noexcept { return half_gamma_; }
  double cavity_detuning() const noexcept { return cavity_detuning_; }
  double g_collective() const noexcept { return g_collective_; }
  std::span<const double> detuning() const noexcept { return detuning_; }
  std::span<const double> couplings() const noexcept { return g_; }

  /// Complex cavity pole ω_c − iκ/2 in this frame.
  cplx cavity_pole() const noexcept { return {cavity_detuning_, -half_kappa_}; }

  cplx memory_kernel(cplx z) const {
    const double zr = z.real();
    const double zi = z.imag() + half_gamma_;
    if (zi == 0.0) {
      for (double d : detuning_)
        if (d == zr) throw PoleCollisionError("W(omega): omega coincides with a spin node while gamma_0 = 0");
    }
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < detuning_.size(); ++j) {
      const double a = zr - detuning_[j];
      const double s = g2_[j] / (a * a + zi * zi);
      re += a * s;
      im -= zi * s;
    }
    return {re, im};
  }

  cplx cavity_amplitude(cplx z) const {
    const cplx denom = z - cavity_detuning_ + cplx(0.0, half_kappa_) - memory_kernel(z);
    return cplx(0.0, 1.0) / denom;
  }

  double extent() const noexcept {
    double e = std::abs(cavity_detuning_);
    for (double d : detuning_) e = std::max(e, std::abs(d));
    return e;
  }

 private:
  double reference_;
  double half_kappa_;
  double half_gamma_;
  double cavity_detuning_;
  double g_collective_;
  std::vector<double> detuning_;
  std::vector<double> g2_;
  std::vector<double> g_;
};

}  // namespace detail

/// W(ω) = Σ_j g_j²/(ω − ω_j + iγ₀/2). Throws PoleCollisionError when γ₀ = 0
/// and a real ω hits a node exactly; evaluate slightly off the node or at
/// complex ω instead.
inline cplx memory_kernel_W(const SpinDistribution& dist, const CavityModel& cav, cplx omega) {
  cav.validate();
  const detail::Frame frame(dist, cav, cav.omega_c);
  return frame.memory_kernel(omega - cav.omega_c);
}

inline cplx memory_kernel_W(const SpinDistribution& dist, const CavityModel& cav, double omega) {
  return memory_kernel_W(dist, cav, cplx(omega, 0.0));
}

/// t₁(−iω) = i / (ω − ω_c + iκ/2 − W(ω)), the Laplace transform of ⟨a(t)a†(0)⟩.
inline cplx cavity_amplitude_t1(const SpinDistribution& dist, const CavityModel& cav, cplx omega) {
  cav.validate();
  const detail::Frame frame(dist, cav, cav.omega_c);
  return frame.cavity_amplitude(omega - cav.omega_c);
}

inline cplx cavity_amplitude_t1(const SpinDistribution& dist, const CavityModel& cav, double omega) {
  return cavity_amplitude_t1(dist, cav, cplx(omega, 0.0));
}

/// Normalized components c_k of b†_ωp = Σ_k c_k b†_k, c_k ∝ α(ω_k − ω_p) g_k.
/// Computed from √weight_k, so the mode is defined even when g_K = 0.
inline std::vector<cplx> excitation_coefficients(const SpinDistribution& dist, const PulseEnvelope& env,
                                                 double omega_p) {
  const auto omega = dist.node_frequencies();
  const auto weight = dist.node_weights();
  std::vector<cplx> c(omega.size());
  double norm2 = 0.0;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    c[k] = env.amplitude(omega[k] - omega_p) * std::sqrt(weight[k]);
    norm2 += std::norm(c[k]);
  }
  if (!(norm2 > 0.0) || !std::isfinite(norm2))
    throw InvalidArgument("excitation_coefficients: pulse has no overlap with the spin distribution");
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& v : c) v *= inv;
  return c;
}

/// F(ω_p): A√ρ(ω_p) in narrow-pulse mode, (α∗ρ)(ω_p)/√((|α|²∗ρ)(ω_p)) over
/// the nodes otherwise. Σ_k c_k g_k = g_K F.
inline cplx pulse_overlap_factor(const SpinDistribution& dist, const PulseEnvelope& env, double omega_p,
                                 TransferMode mode) {
  if (mode == TransferMode::narrow_pulse) return pulse_constant_A(env) * std::sqrt(density_at(dist, omega_p));
  const auto c = excitation_coefficients(dist, env, omega_p);
  const auto weight = dist.node_weights();
  cplx sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) sum += c[k] * std::sqrt(weight[k]);
  return sum;
}

/// Warns when the pulse is too broad for the narrow-pulse collapse.
inline std::optional<std::string> narrow_pulse_warning(const SpinDistribution& dist, const PulseEnvelope& env) {
  const double narrowest = dist.narrowest_fwhm();
  if (narrowest > 0.0 && env.fwhm() > narrowest / 5.0)
    return "pulse fwhm exceeds narrowest line fwhm / 5; narrow-pulse mode is inaccurate, use exact-convolution";
  return std::nullopt;
}

/// t_ωp(−iω), the Laplace transform of β(ω_p, t) = ⟨a(t) b†_ωp(0)⟩.
///   narrow / exact-convolution:  i g_K F(ω_p) t₁(ω) / (ω − ω_p + iγ₀/2)
///   resolvent:                   i t₁(ω) Σ_k c_k g_k / (ω − ω_k + iγ₀/2)
inline cplx transfer_spectrum_t(const SpinDistribution& dist, const CavityModel& cav, const PulseEnvelope& env,
                                double omega_p, cplx omega, TransferMode mode) {
  cav.validate();
  const detail::Frame frame(dist, cav, cav.omega_c);
  const cplx z = omega - cav.omega_c;
  const cplx t1 = frame.cavity_amplitude(z);
  const cplx i(0.0, 1.0);
  if (mode == TransferMode::resolvent) {
    const auto c = excitation_coefficients(dist, env, omega_p);
    const auto d = frame.detuning();
    const auto g = frame.couplings();
    cplx sum = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
      sum += c[k] * g[k] * detail::inverse(z.real() - d[k], z.imag() + frame.half_gamma());
    return i * t1 * sum;
  }
  const double xr = z.real() - (omega_p - cav.omega_c);
  const double xi = z.imag() + frame.half_gamma();
  if (xr == 0.0 && xi == 0.0) throw PoleCollisionError("t_wp: omega equals omega_p while gamma_0 = 0");
  return i * dist.g_collective() * pulse_overlap_factor(dist, env, omega_p, mode) * t1 * detail::inverse(xr, xi);
}

inline cplx transfer_spectrum_t(const SpinDistribution& dist, const CavityModel& cav, const PulseEnvelope& env,
                                double omega_p, double omega, TransferMode mode) {
  return transfer_spectrum_t(dist, cav, env, omega_p, cplx(omega, 0.0), mode);
}

enum class TransferMethod { contour, time_domain };

inline std::string_view to_string(TransferMethod method) {
  return method == TransferMethod::contour ? "contour" : "time_domain";
}

/// β(ω_p, t) sampled on a time grid, in the frame rotating at `frame`
/// (the cavity frequency): β_lab(t) = β(t) e^{−i·frame·t}.
struct TransferResult {
  double omega_p = 0.0;
  double frame = 0.0;
  std::vector<double> times;
  std::vector<cplx> beta;
  TransferMethod method = TransferMethod::contour;
  /// Σ_i |X_i(t)|², filled by the time-domain route only.
  std::vector<double> norm;
  std::vector<std::string> warnings;
};

/// CSV with header `t_s,re_beta,im_beta,abs2_beta`.
inline void write_transfer_csv(std::ostream& out, const TransferResult& result) {
  out << "t_s,re_beta,im_beta,abs2_beta\n";
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    const cplx b = result.beta[i];
    detail::write_row(out, {result.times[i], b.real(), b.imag(), std::norm(b)});
  }
}

namespace detail {

inline void validate_times(std::span<const double> times) {
  if (times.empty()) throw InvalidArgument("time grid is empty");
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time grid entries must be finite and >= 0");
}

}  // namespace detail
}  // namespace qesr
