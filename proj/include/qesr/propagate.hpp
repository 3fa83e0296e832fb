#pragma once

// Brute-force propagation of dX/dt = −i H_eff X in the frame rotating at ω_c.
// H_eff couples the cavity to every spin and nothing else, so one
// right-hand-side evaluation is O(N):
//
//   dX_0/dt = −(κ/2) X_0 + Σ_k g_k X_k
//   dX_k/dt = −g_k X_0 − (i d_k + γ₀/2) X_k,      d_k = ω_k − ω_c.

#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "qesr/dynamics.hpp"
#include "qesr/errors.hpp"

namespace qesr {

/// x_G = (1, 0, …, 0): the photon starts in the cavity.
struct CavityExcited {};

/// X_k(0) = c_k from excitation_coefficients, cavity empty.
struct PulseExcited {
  PulseEnvelope envelope;
  double omega_p = 0.0;
};

using InitialCondition = std::variant<CavityExcited, PulseExcited>;

struct PropagationOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Bound on the integrator working set, about 12 state vectors.
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
  /// Steps allowed between two consecutive output times.
  std::size_t max_steps_per_sample = 100000;
};

namespace detail {

class ArrowSystem {
 public:
  using State = std::vector<cplx>;

  explicit ArrowSystem(const Frame& frame) : frame_(frame) {}

  void operator()(const State& x, State& dxdt, double /*t*/) const {
    const auto d = frame_.detuning();
    const auto g = frame_.couplings();
    const double hg = frame_.half_gamma();
    const cplx x0 = x[0];
    cplx acc = -frame_.half_kappa() * x0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      const cplx xk = x[k + 1];
      acc += g[k] * xk;
      dxdt[k + 1] = -g[k] * x0 - cplx(hg, d[k]) * xk;
    }
    dxdt[0] = acc;
  }

 private:
  const Frame& frame_;
};

}  // namespace detail

/// ⟨a(t)·X(0)†⟩ on an increasing time grid, with the norm Σ|X_i|² per sample.
inline TransferResult time_domain_propagate(const SpinDistribution& dist, const CavityModel& cav,
                                            const InitialCondition& initial, std::span<const double> times,
                                            const PropagationOptions& opts = {}) {
  namespace odeint = boost::numeric::odeint;
  cav.validate();
  detail::validate_times(times);
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InvalidArgument("time_domain_propagate: times must be strictly increasing");
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) throw InvalidArgument("time_domain_propagate: tolerances must be > 0");

  const std::size_t dim = dist.size() + 1;
  const double bytes = 12.0 * static_cast<double>(dim) * sizeof(cplx);
  if (bytes > static_cast<double>(opts.memory_budget_bytes))
    throw MemoryBudgetError("time_domain_propagate: " + std::to_string(dim) + " states need ~" +
                            std::to_string(static_cast<long long>(bytes)) + " bytes, over the configured budget");

  const detail::Frame frame(dist, cav, cav.omega_c);
  detail::ArrowSystem system(frame);
  detail::ArrowSystem::State x(dim, cplx(0.0));

  TransferResult result;
  result.frame = cav.omega_c;
  result.method = TransferMethod::time_domain;
  result.times.assign(times.begin(), times.end());
  if (const auto* pulse = std::get_if<PulseExcited>(&initial)) {
    result.omega_p = pulse->omega_p;
    const auto c = excitation_coefficients(dist, pulse->envelope, pulse->omega_p);
    for (std::size_t k = 0; k < c.size(); ++k) x[k + 1] = c[k];
  } else {
    result.omega_p = cav.omega_c;
    x[0] = 1.0;
  }

  result.beta.reserve(times.size());
  result.norm.reserve(times.size());
  auto observe = [&](const detail::ArrowSystem::State& state, double) {
    double n = 0.0;
    for (const auto& v : state) n += std::norm(v);
    result.beta.push_back(state[0]);
    result.norm.push_back(n);
  };

  const double rate = std::max({dist.g_collective(), cav.kappa, frame.extent(), 1.0 / (times.back() + 1e-300)});
  const double dt0 = 0.01 / rate;
  auto stepper = odeint::make_dense_output(opts.atol, opts.rtol, odeint::runge_kutta_dopri5<detail::ArrowSystem::State>());
  try {
    odeint::integrate_times(stepper, std::ref(system), x, times.begin(), times.end(), dt0, observe,
                            odeint::max_step_checker(static_cast<int>(opts.max_steps_per_sample)));
  } catch (const std::exception& e) {
    throw StepSizeError(std::string("time_domain_propagate: integrator failed: ") + e.what());
  }
  return result;
}

}  // namespace qesr
