#pragma once

// Subcommand orchestration behind the `qesr` tool. Every subcommand runs
// once per configured ensemble (sensitivity runs once), writes CSV data
// files plus `<subcommand>_summary.json` into the output directory, and
// returns the summary. Outputs depend only on the configuration: sweep
// points are computed independently, so any thread count gives the same
// bytes.

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qesr/config.hpp"
#include "qesr/contour.hpp"
#include "qesr/errors.hpp"
#include "qesr/parallel.hpp"
#include "qesr/propagate.hpp"
#include "qesr/protocol.hpp"
#include "qesr/sensitivity.hpp"
#include "qesr/units.hpp"

namespace qesr::app {

using ojson = nlohmann::ordered_json;

enum class Subcommand { spectrum, swap, transfer, sensitivity, density };

inline std::string_view to_string(Subcommand s) {
  switch (s) {
    case Subcommand::spectrum: return "spectrum";
    case Subcommand::swap: return "swap";
    case Subcommand::transfer: return "transfer";
    case Subcommand::sensitivity: return "sensitivity";
    case Subcommand::density: return "density";
  }
  return "?";
}

struct RunOptions {
  std::filesystem::path output_directory;  // empty: the config's output.directory
  unsigned threads = 1;
  std::optional<TransferMode> mode;  // overrides spectrum.mode and transfer.mode
};

struct RunReport {
  ojson summary;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;
};

enum ExitCode : int { success = 0, internal_error = 1, config_error = 2, guard_violation = 3, io_error = 4 };

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return config_error;
  if (dynamic_cast<const NumericalError*>(&e)) return guard_violation;
  if (dynamic_cast<const IoError*>(&e)) return io_error;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return io_error;
  return internal_error;
}

namespace detail {

inline std::string file_stem(std::string_view name) {
  std::string out;
  for (char ch : name) {
    const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '+' ||
                      ch == '-' || ch == '.' || ch == '_';
    out += keep ? ch : '_';
  }
  return out;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

class Writer {
 public:
  explicit Writer(std::filesystem::path dir, RunReport& report) : dir_(std::move(dir)), report_(report) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
    report_.files.push_back(path);
  }

 private:
  std::filesystem::path dir_;
  RunReport& report_;
};

inline void add_warnings(RunReport& report, ojson& target, const std::vector<std::string>& warnings,
                         const std::string& context) {
  ojson list = ojson::array();
  for (const auto& w : warnings) {
    list.push_back(w);
    report.warnings.push_back(context + ": " + w);
  }
  target["warnings"] = list;
}

inline ojson nullable(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

inline void run_density(const RunConfig& cfg, const EnsembleCatalog& catalog, Writer& out, RunReport& report) {
  ojson list = ojson::array();
  for (const auto& e : catalog) {
    const auto& d = e.distribution;
    const std::string file = "density_" + file_stem(e.name) + ".csv";
    out.write(file, [&](std::ostream& os) { write_distribution_csv(os, d); });
    ojson j;
    j["ensemble"] = e.name;
    j["file"] = file;
    j["n_nodes"] = d.size();
    j["g_collective_hz"] = angular_to_hz(d.g_collective());
    j["unnormalized_mass"] = d.unnormalized_mass();
    add_warnings(report, j, d.warnings(), e.name);
    list.push_back(j);
  }
  (void)cfg;
  report.summary["ensembles"] = list;
}

inline void run_swap(const RunConfig& cfg, const EnsembleCatalog& catalog, Writer& out, RunReport& report) {
  ojson list = ojson::array();
  const auto tau = linspace(0.0, cfg.swap.t_max_s, cfg.swap.points);
  for (const auto& e : catalog) {
    const auto cav = cavity_for(cfg, e.omega_center);
    const auto trace = simulate_swap(e.distribution, cav, cfg.qubit, tau, contour_options(cfg));
    const std::string file = "swap_" + file_stem(e.name) + ".csv";
    out.write(file, [&](std::ostream& os) { write_swap_csv(os, trace); });
    ojson j;
    j["ensemble"] = e.name;
    j["file"] = file;
    j["tau_s"] = nullable(trace.tau_s);
    j["oscillation_frequency_rad_per_s"] = nullable(trace.oscillation_frequency);
    j["return_time_s"] = nullable(trace.return_time);
    j["return_p_e"] = nullable(trace.return_p_e);
    add_warnings(report, j, trace.warnings, e.name);
    list.push_back(j);
  }
  report.summary["ensembles"] = list;
}

inline void run_transfer(const RunConfig& cfg, const EnsembleCatalog& catalog, const RunOptions& opts, Writer& out,
                         RunReport& report) {
  ojson list = ojson::array();
  const auto times = linspace(0.0, cfg.transfer.t_max_s, cfg.transfer.points);
  const auto mode = opts.mode.value_or(cfg.transfer.mode);
  const auto env = pulse_envelope(cfg);
  for (const auto& e : catalog) {
    const auto cav = cavity_for(cfg, e.omega_center);
    const double omega_p = e.omega_center + hz_to_angular(cfg.transfer.offset_hz);
    const auto contour = invert_to_time(e.distribution, cav, env, omega_p, times, mode, contour_options(cfg));
    const std::string stem = "transfer_" + file_stem(e.name);
    out.write(stem + "_contour.csv", [&](std::ostream& os) { write_transfer_csv(os, contour); });
    ojson j;
    j["ensemble"] = e.name;
    j["omega_p_rad_per_s"] = omega_p;
    j["mode"] = to_string(mode);
    j["contour_file"] = stem + "_contour.csv";
    double peak = 0.0;
    for (const auto& b : contour.beta) peak = std::max(peak, std::norm(b));
    j["max_abs2_beta"] = peak;
    std::vector<std::string> warnings = contour.warnings;
    if (cfg.transfer.compare_ode) {
      const auto ode = time_domain_propagate(e.distribution, cav, PulseExcited{env, omega_p}, times,
                                             propagation_options(cfg));
      out.write(stem + "_ode.csv", [&](std::ostream& os) { write_transfer_csv(os, ode); });
      double diff = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i)
        diff = std::max(diff, std::abs(std::abs(contour.beta[i]) - std::abs(ode.beta[i])));
      j["ode_file"] = stem + "_ode.csv";
      j["max_abs_beta_difference"] = diff;
      if (mode != TransferMode::resolvent)
        warnings.emplace_back("the time-domain route is exact; differences include the spectral-collapse approximation");
    }
    add_warnings(report, j, warnings, e.name);
    list.push_back(j);
  }
  report.summary["ensembles"] = list;
}

inline void run_spectrum(const RunConfig& cfg, const EnsembleCatalog& catalog, const RunOptions& opts, Writer& out,
                         RunReport& report) {
  ojson list = ojson::array();
  const auto mode = opts.mode.value_or(cfg.spectrum.mode);
  const auto env = pulse_envelope(cfg);
  for (const auto& e : catalog) {
    const auto cav = cavity_for(cfg, e.omega_center);
    const double tau_s = cfg.spectrum.tau_s ? *cfg.spectrum.tau_s : find_swap_time(e.distribution, cav);
    const double half_span = 0.5 * hz_to_angular(cfg.spectrum.span_hz);
    const auto sweep = linspace(e.omega_center - half_span, e.omega_center + half_span, cfg.spectrum.points);
    const auto result = esr_spectrum(e.distribution, cav, env, cfg.qubit, sweep, tau_s, cfg.spectrum.n_p, mode,
                                     opts.threads, contour_options(cfg));
    const std::string file = "spectrum_" + file_stem(e.name) + ".csv";
    out.write(file, [&](std::ostream& os) { write_spectrum_csv(os, result); });

    ojson j;
    j["ensemble"] = e.name;
    j["file"] = file;
    j["mode"] = to_string(mode);
    j["tau_s"] = tau_s;
    j["n_p"] = cfg.spectrum.n_p;
    j["scale"] = result.scale;
    double transferred = 0.0;
    for (double b : result.abs2_beta) transferred = std::max(transferred, cfg.spectrum.n_p * b);
    j["max_n_transferred"] = transferred;
    ojson peaks = ojson::array();
    for (const auto& p : result.peaks)
      peaks.push_back({{"frequency_hz", angular_to_hz(p.omega)},
                       {"offset_hz", angular_to_hz(p.omega - e.omega_center)},
                       {"p_e", p.p_e}});
    j["peaks"] = peaks;
    ojson separations = ojson::array();
    for (std::size_t i = 1; i < result.peaks.size(); ++i)
      separations.push_back(angular_to_hz(result.peaks[i].omega - result.peaks[i - 1].omega));
    j["peak_separations_hz"] = separations;
    if (cfg.spectrum.n_p > 0.0) {
      const auto budget = excitation_budget(e.distribution, cav, env, cfg.spectrum.n_p, e.omega_center, tau_s, mode,
                                            contour_options(cfg));
      j["budget_at_center"] = {{"n_bp_mode", budget.n_bp_mode},
                               {"n_transferred", budget.n_transferred},
                               {"ratio", budget.ratio}};
    }
    add_warnings(report, j, result.warnings, e.name);
    list.push_back(j);
  }
  report.summary["ensembles"] = list;
}

inline void run_sensitivity(const RunConfig& cfg, const RunOptions& opts, Writer& out, RunReport& report) {
  const auto& s = cfg.sensitivity;
  const double omega_c =
      cfg.cavity.frequency_hz ? hz_to_angular(*cfg.cavity.frequency_hz) : hz_to_angular(cfg.ensembles.front().center_hz);
  const double kappa = s.kappa_hz ? hz_to_angular(*s.kappa_hz) : cavity_for(cfg, omega_c).kappa;

  struct Row {
    double g_hz, linewidth_t, n_threshold;
    double delta = 0.0, n_min = 0.0;
    PeakPhotonNumber peak;
    bool weak = false;
  };
  std::vector<Row> rows;
  for (double g : s.g_hz)
    for (double lw : s.linewidth_t)
      for (double n : s.n_threshold) rows.push_back({g, lw, n, 0.0, 0.0, {}, false});

  parallel_for(rows.size(), opts.threads, [&](std::size_t i) {
    auto& r = rows[i];
    r.delta = delta_from_linewidth(r.linewidth_t, s.hz_per_tesla);
    const double g = hz_to_angular(r.g_hz);
    r.n_min = min_detectable_spins(g, r.delta, r.n_threshold);
    const WeakCouplingScenario scenario{g, r.n_min, r.delta, kappa, r.n_threshold};
    r.peak = peak_photon_number(scenario);
    r.weak = scenario.weak_coupling();
  });

  out.write("sensitivity.csv", [&](std::ostream& os) {
    os << "g_hz,linewidth_t,delta_hz,n_threshold,n_min,nbar_closed_form,nbar_numeric,t_peak_s,weak_coupling\n";
    for (const auto& r : rows)
      qesr::detail::write_row(os, {r.g_hz, r.linewidth_t, angular_to_hz(r.delta), r.n_threshold, r.n_min,
                                   r.peak.closed_form, r.peak.numeric, r.peak.t_peak, r.weak ? 1.0 : 0.0});
  });

  ojson list = ojson::array();
  std::vector<std::string> warnings;
  for (const auto& r : rows) {
    list.push_back({{"g_hz", r.g_hz},
                    {"delta_hz", angular_to_hz(r.delta)},
                    {"n_threshold", r.n_threshold},
                    {"n_min", r.n_min},
                    {"nbar_closed_form", r.peak.closed_form},
                    {"nbar_numeric", r.peak.numeric},
                    {"weak_coupling", r.weak}});
    for (const auto& w : r.peak.warnings)
      if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
  }
  report.summary["file"] = "sensitivity.csv";
  report.summary["kappa_hz"] = angular_to_hz(kappa);
  report.summary["n_min"] = rows.front().n_min;
  report.summary["rows"] = list;
  add_warnings(report, report.summary, warnings, "sensitivity");
}

}  // namespace detail

inline RunReport run(Subcommand sub, const RunConfig& cfg, const RunOptions& opts = {}) {
  RunReport report;
  report.summary["schema"] = "qesr/" + std::string(to_string(sub)) + "/1";
  const auto dir = opts.output_directory.empty() ? std::filesystem::path(cfg.output_directory) : opts.output_directory;
  detail::Writer out(dir, report);
  if (sub == Subcommand::sensitivity) {
    detail::run_sensitivity(cfg, opts, out, report);
  } else {
    const auto catalog = build_catalog(cfg);
    switch (sub) {
      case Subcommand::density: detail::run_density(cfg, catalog, out, report); break;
      case Subcommand::swap: detail::run_swap(cfg, catalog, out, report); break;
      case Subcommand::transfer: detail::run_transfer(cfg, catalog, opts, out, report); break;
      case Subcommand::spectrum: detail::run_spectrum(cfg, catalog, opts, out, report); break;
      case Subcommand::sensitivity: break;
    }
  }
  const auto text = report.summary.dump(2) + "\n";
  out.write(std::string(to_string(sub)) + "_summary.json", [&](std::ostream& os) { os << text; });
  return report;
}

}  // namespace qesr::app
