// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria, so ctest reports any failure.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qesr/app.hpp"
#include "qesr/config.hpp"
#include "qesr/qesr.hpp"

using namespace qesr;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double MHz = 1e6;
constexpr double ns = 1e-9;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [x]";
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void criterion(const char* id, const char* title, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail += std::string(v.detail.empty() ? "" : "; ") + "exception: " + e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++failures;
  std::printf("%s %s %s: %s (%.2f s)\n", id, v.pass ? "PASS" : "FAIL", title, v.detail.c_str(), seconds);
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

RunConfig bundled(const char* name) { return parse_config_file(std::string(QESR_CONFIG_DIR) + "/" + name); }

struct Scenario {
  std::string name;
  SpinDistribution dist;
  CavityModel cav;
  PulseEnvelope env;
  double omega_p;
};

Scenario from_config(const RunConfig& c) {
  const auto catalog = build_catalog(c);
  const auto& e = catalog.at(c.ensembles.front().name);
  const auto cav = cavity_for(c, e.omega_center);
  return {e.name, e.distribution, cav, pulse_envelope(c), e.omega_center + hz_to_angular(c.transfer.offset_hz)};
}

// Triplet ensembles with random widths, couplings, Q and probe offset.
Scenario random_scenario(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double center = hz_to_angular(2.9e9);
  DistributionSpec spec;
  const int n_lines = 1 + static_cast<int>(3.0 * u(rng)) % 3;
  const double split = hz_to_angular((1.0 + 2.0 * u(rng)) * MHz);
  const double fwhm = hz_to_angular((0.5 + 2.5 * u(rng)) * MHz);
  for (int k = 0; k < n_lines; ++k)
    spec.lines.push_back({center + (k - 0.5 * (n_lines - 1)) * split, fwhm, 0.5 + u(rng)});
  spec.g_collective = hz_to_angular((1.0 + 4.0 * u(rng)) * MHz);
  spec.n_nodes = 5000;
  const double q = std::pow(10.0, 3.7 + u(rng));
  const auto env = PulseEnvelope::lorentzian(hz_to_angular((50.0 + 250.0 * u(rng)) * 1e3));
  const double omega_p = center + hz_to_angular((u(rng) - 0.5) * 4.0 * MHz);
  return {"random" + std::to_string(index), build_distribution(spec), CavityModel::from_quality(center, q), env,
          omega_p};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  const auto plus_I = bundled("plus_I.cfg");
  const auto plus_III = bundled("plus_III.cfg");

  criterion("A1", "contour inversion vs time-domain propagation", [&](Verdict& v) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Scenario> cases{from_config(plus_I), from_config(plus_III)};
    std::mt19937_64 rng(20240917);
    for (int i = 0; i < 5; ++i) cases.push_back(random_scenario(rng, i));
    const auto t = linspace(0.0, 400 * ns, 401);
    double worst = 0.0;
    for (const auto& s : cases) {
      const auto contour = invert_to_time(s.dist, s.cav, s.env, s.omega_p, t);
      const auto ode = time_domain_propagate(s.dist, s.cav, PulseExcited{s.env, s.omega_p}, t);
      double diff = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i)
        diff = std::max(diff, std::abs(std::abs(contour.beta[i]) - std::abs(ode.beta[i])));
      v.require(diff < 1e-3, s.name + " " + fmt("%.2e", diff));
      worst = std::max(worst, diff);
    }
    const double seconds = elapsed_since(start);
    v.require(seconds < 60.0, "runtime " + fmt("%.1f s", seconds) + " < 60 s");
  });

  criterion("A2", "vacuum Rabi limit", [&](Verdict& v) {
    const double g = hz_to_angular(2.9 * MHz);
    const double w = hz_to_angular(2.91e9);
    const auto d = SpinDistribution::from_nodes({w}, {1.0}, g);
    const CavityModel cav{w, 0.0, 0.0};
    const auto t = linspace(0.0, 2.0 * pi / g, 801);
    const auto r = invert_to_time(d, cav, PulseEnvelope::lorentzian(hz_to_angular(150e3)), w, t);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
      worst = std::max(worst, std::abs(std::abs(r.beta[i]) - std::abs(std::sin(g * t[i]))));
    v.require(worst < 0.02, "max ||beta|-|sin g t|| " + fmt("%.2e", worst));
    const double tau = find_swap_time(d, cav);
    const double expected = pi / (2.0 * g);
    const double rel = std::abs(tau / expected - 1.0);
    v.require(rel < 5e-3, "tau_s " + fmt("%.3f ns", tau / ns) + " vs " + fmt("%.3f ns", expected / ns));
  });

  criterion("A3", "spectrum shape", [&](Verdict& v) {
    for (const auto* c : {&plus_I, &plus_III}) try {
      const auto start = std::chrono::steady_clock::now();
      const auto s = from_config(*c);
      const double tau = find_swap_time(s.dist, s.cav);
      const double half = 0.5 * hz_to_angular(c->spectrum.span_hz);
      const auto sweep = linspace(s.cav.omega_c - half, s.cav.omega_c + half, 401);
      const auto spec = esr_spectrum(s.dist, s.cav, s.env, c->qubit, sweep, tau, c->spectrum.n_p,
                                     TransferMode::narrow_pulse, 0);
      const double seconds = elapsed_since(start);
      if (spec.peaks.size() != 3) {
        v.require(false, s.name + " " + std::to_string(spec.peaks.size()) + " peaks");
        continue;
      }
      for (std::size_t i = 1; i < 3; ++i) {
        const double sep = angular_to_hz(spec.peaks[i].omega - spec.peaks[i - 1].omega) / MHz;
        v.require(std::abs(sep - 2.2) <= 0.1, s.name + " spacing " + fmt("%.3f MHz", sep));
      }
      const auto& p = spec.peaks;
      v.require(p[1].p_e < p[0].p_e && p[1].p_e < p[2].p_e,
                s.name + " peaks " + fmt("%.4f/", p[0].p_e) + fmt("%.4f/", p[1].p_e) + fmt("%.4f", p[2].p_e));
      v.require(seconds < 120.0, s.name + " runtime " + fmt("%.1f s", seconds));

      // Weak coupling: peak heights follow the equal line weights. The swap
      // is overdamped there, so the detection time stays at the strong-coupling τ_s.
      auto weak_cfg = *c;
      weak_cfg.ensembles[0].g_collective_hz *= 0.1;
      const auto w = from_config(weak_cfg);
      const auto weak = esr_spectrum(w.dist, w.cav, w.env, c->qubit, sweep, tau, c->spectrum.n_p,
                                     TransferMode::narrow_pulse, 0);
      if (weak.peaks.size() != 3) {
        v.require(false, s.name + " g/10: " + std::to_string(weak.peaks.size()) + " peaks");
        continue;
      }
      double lo = weak.peaks[0].p_e, hi = lo;
      for (const auto& q : weak.peaks) lo = std::min(lo, q.p_e), hi = std::max(hi, q.p_e);
      v.require(hi / lo - 1.0 <= 0.05, s.name + " g/10 peak spread " + fmt("%.1f%%", 100.0 * (hi / lo - 1.0)));
    } catch (const std::exception& e) {
      v.require(false, c->ensembles[0].name + " exception: " + e.what());
    }
  });

  criterion("A4", "excitation budget", [&](Verdict& v) {
    for (const auto* c : {&plus_I, &plus_III}) {
      const auto s = from_config(*c);
      const double tau = find_swap_time(s.dist, s.cav);
      const auto b = excitation_budget(s.dist, s.cav, s.env, 15.0, s.cav.omega_c, tau);
      v.require(b.n_transferred < 1.0, s.name + " transferred " + fmt("%.3f", b.n_transferred));
      v.require(b.ratio >= 10.0 && b.ratio <= 40.0, s.name + " ratio " + fmt("%.2f", b.ratio));
    }
  });

  criterion("A5", "weak-coupling sensitivity", [&](Verdict& v) {
    const auto start = std::chrono::steady_clock::now();
    const double g = hz_to_angular(10.0);
    const double delta = hz_to_angular(2.8 * MHz);
    const double n_min = min_detectable_spins(g, delta, 0.05);
    v.require(n_min >= 1e5 && n_min <= 1.5e5, "N_min " + fmt("%.4g", n_min));
    const auto p = peak_photon_number({g, n_min, delta, delta / 100.0, 0.05});
    const double rel = std::abs(p.numeric / p.closed_form - 1.0);
    v.require(rel <= 0.02, "numeric/closed-form maximum off by " + fmt("%.2f%%", 100.0 * rel));
    const double seconds = elapsed_since(start);
    v.require(seconds < 1.0, "runtime " + fmt("%.3f s", seconds));
  });

  criterion("A6", "pulse constant and narrow-pulse approximation", [&](Verdict& v) {
    double worst = 0.0;
    for (double fwhm : {1e3, 2.0 * pi * 150e3, 1e8}) {
      const double a = pulse_constant_A(PulseEnvelope::lorentzian(fwhm));
      worst = std::max(worst, std::abs(a / std::sqrt(pi * fwhm / 2.0) - 1.0));
    }
    v.require(worst <= 1e-9, "A relative error " + fmt("%.1e", worst));

    auto cfg = plus_I;
    cfg.ensembles[0].n_nodes = 200001;
    cfg.ensembles[0].window_fwhm = 200.0;
    const auto s = from_config(cfg);
    const auto env = PulseEnvelope::lorentzian(hz_to_angular(cfg.ensembles[0].lines[1].fwhm_hz) / 20.0);
    const double narrow = std::abs(pulse_overlap_factor(s.dist, env, s.cav.omega_c, TransferMode::narrow_pulse));
    const double conv = std::abs(pulse_overlap_factor(s.dist, env, s.cav.omega_c, TransferMode::exact_convolution));
    const double rel = std::abs(narrow - conv) / conv;
    v.require(rel < 0.02, "triplet center narrow vs convolution " + fmt("%.2f%%", 100.0 * rel));
  });

  criterion("A7", "invariants", [&](Verdict& v) {
    const auto s = from_config(plus_I);
    const CavityModel lossless{s.cav.omega_c, 0.0, 0.0};
    const auto t = linspace(0.0, 1000 * ns, 201);
    double drift = 0.0;
    for (const InitialCondition& start :
         {InitialCondition{CavityExcited{}}, InitialCondition{PulseExcited{s.env, s.omega_p}}}) {
      const auto r = time_domain_propagate(s.dist, lossless, start, t);
      for (double n : r.norm) drift = std::max(drift, std::abs(n - 1.0));
    }
    v.require(drift <= 1e-8, "lossless norm drift " + fmt("%.1e", drift));

    double mass = 0.0;
    for (const auto* c : {&plus_I, &plus_III}) {
      double sum = 0.0;
      for (double w : from_config(*c).dist.node_weights()) sum += w;
      mass = std::max(mass, std::abs(sum - 1.0));
    }
    v.require(mass <= 1e-9, "weight normalization " + fmt("%.1e", mass));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double round_trip = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double g = std::pow(10.0, 1.0 + 4.0 * u(rng));
      const double n = std::pow(10.0, 2.0 + 10.0 * u(rng));
      const double delta = std::pow(10.0, 5.0 + 4.0 * u(rng));
      const double nbar = peak_photon_number({g, n, delta, delta / 100.0, 0.05}).closed_form;
      round_trip = std::max(round_trip, std::abs(min_detectable_spins(g, delta, nbar) / n - 1.0));
    }
    v.require(round_trip <= 1e-10, "N_min round trip " + fmt("%.1e", round_trip));

    auto quick = plus_I;
    quick.ensembles[0].n_nodes = 1000;
    quick.spectrum.points = 61;
    const fs::path dir = fs::temp_directory_path() / ("qesr_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    std::vector<std::string> outputs;
    int run = 0;
    for (unsigned threads : {1u, 1u, 2u, hardware_threads()}) {
      const auto sub = dir / std::to_string(run++);
      const auto report = app::run(app::Subcommand::spectrum, quick, {sub, threads, std::nullopt});
      std::string all;
      for (const auto& f : report.files) all += slurp(f);
      outputs.push_back(all);
    }
    fs::remove_all(dir);
    const bool identical = std::all_of(outputs.begin(), outputs.end(), [&](const auto& o) { return o == outputs[0]; });
    v.require(identical, "outputs byte-identical across runs and 1/2/" + std::to_string(hardware_threads()) + " threads");
  });

  criterion("A8", "swap retrieval fidelity", [&](Verdict& v) {
    const auto s = from_config(plus_I);
    const auto tau = linspace(0.0, plus_I.swap.t_max_s, plus_I.swap.points);
    const auto trace = simulate_swap(s.dist, s.cav, plus_I.qubit, tau);
    if (!trace.return_p_e) {
      v.require(false, "no photon return inside the grid");
      return;
    }
    const double p = *trace.return_p_e;
    v.require(p >= 0.05 && p <= 0.2, "return P_e " + fmt("%.4f", p) + " vs 0.1 within a factor 2");
  });

  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
