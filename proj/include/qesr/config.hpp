#pragma once

// Run configuration: strict JSON with every frequency in Hz (cycles per
// second). Keys ending in `_hz` are converted with ω = 2π f, including the
// rates κ and γ₀. Unknown keys are rejected; absent keys take the defaults
// listed in `RunConfig`. print_effective_config emits the resolved
// configuration in canonical order, so its output parses back to itself.

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qesr/contour.hpp"
#include "qesr/dynamics.hpp"
#include "qesr/errors.hpp"
#include "qesr/propagate.hpp"
#include "qesr/protocol.hpp"
#include "qesr/pulse.hpp"
#include "qesr/spin_model.hpp"
#include "qesr/units.hpp"

namespace qesr {

inline constexpr int config_schema_version = 1;

struct LineConfig {
  double offset_hz = 0.0;  // from the ensemble center
  double fwhm_hz = 0.0;
  double weight = 1.0;
};

struct SatelliteConfig {
  double offset_hz = 0.0;
  double weight = 0.0;
};

struct EnsembleConfig {
  std::string name;
  double center_hz = 0.0;
  double g_collective_hz = 0.0;
  double n_spins = 0.0;
  LineShape line_shape = LineShape::lorentzian;
  std::vector<LineConfig> lines;
  std::vector<SatelliteConfig> satellites;
  std::size_t n_nodes = 5000;
  double window_fwhm = 8.0;
  /// Explicit grid window as offsets from the center; both or neither.
  std::optional<double> min_offset_hz;
  std::optional<double> max_offset_hz;
};

struct CavityConfig {
  /// Unset: the cavity is tuned to each ensemble's center.
  std::optional<double> frequency_hz;
  /// κ = ω_c/Q unless kappa_hz is given.
  std::optional<double> quality_factor = 1e4;
  std::optional<double> kappa_hz;
  double gamma_0_hz = 0.0;
};

struct PulseConfig {
  PulseShape shape = PulseShape::lorentzian;
  std::optional<double> fwhm_hz = 150e3;
  std::optional<double> duration_s;  // rectangular only
};

struct SpectrumConfig {
  double n_p = 15.0;
  double span_hz = 8e6;  // sweep covers center ± span/2
  std::size_t points = 401;
  std::optional<double> tau_s;  // unset: find_swap_time per ensemble
  TransferMode mode = TransferMode::narrow_pulse;
};

struct SwapConfig {
  double t_max_s = 400e-9;
  std::size_t points = 801;
};

struct TransferConfig {
  double offset_hz = 0.0;  // ω_p − center
  double t_max_s = 400e-9;
  std::size_t points = 401;
  TransferMode mode = TransferMode::resolvent;
  bool compare_ode = true;
};

struct SensitivityConfig {
  std::vector<double> g_hz{10.0};
  std::vector<double> linewidth_t{1e-4};
  std::vector<double> n_threshold{0.05};
  double hz_per_tesla = 2.8e10;
  /// Unset: κ of the cavity section.
  std::optional<double> kappa_hz;
};

struct NumericsConfig {
  double window_half_width_hz = 0.0;  // 0 = automatic
  double step_hz = 0.0;
  double shift_hz = 0.0;
  double edge_tolerance = 1e-4;
  double truncation_tolerance = 1e-6;
  double ode_rtol = 1e-9;
  double ode_atol = 1e-12;
};

struct RunConfig {
  std::vector<EnsembleConfig> ensembles;
  CavityConfig cavity;
  PulseConfig pulse;
  QubitChain qubit;
  SpectrumConfig spectrum;
  SwapConfig swap;
  TransferConfig transfer;
  SensitivityConfig sensitivity;
  NumericsConfig numerics;
  std::string output_directory = "out";
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

/// Reads one JSON object, remembering the keys used so leftovers can be
/// reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_, path_ + ": expected an object");
  }

  std::string key_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const ojson* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  const ojson& require(std::string_view key) {
    const ojson* v = find(key);
    if (!v || v->is_null()) throw ConfigError(key_path(key), key_path(key) + ": required");
    return *v;
  }

  static double as_number(const ojson& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, path + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, path + ": must be finite");
    return d;
  }

  double number(std::string_view key, double fallback) {
    const ojson* v = find(key);
    return v ? as_number(*v, key_path(key)) : fallback;
  }

  double required_number(std::string_view key) { return as_number(require(key), key_path(key)); }

  std::optional<double> optional_number(std::string_view key, std::optional<double> fallback) {
    const ojson* v = find(key);
    if (!v) return fallback;
    if (v->is_null()) return std::nullopt;
    return as_number(*v, key_path(key));
  }

  std::size_t count(std::string_view key, std::size_t fallback) {
    const ojson* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer() || v->get<long long>() < 0)
      throw ConfigError(key_path(key), key_path(key) + ": expected a non-negative integer");
    return static_cast<std::size_t>(v->get<long long>());
  }

  std::string string(std::string_view key, std::string fallback) {
    const ojson* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(key_path(key), key_path(key) + ": expected a string");
    return v->get<std::string>();
  }

  bool boolean(std::string_view key, bool fallback) {
    const ojson* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(key_path(key), key_path(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::vector<double> numbers(std::string_view key, std::vector<double> fallback) {
    const ojson* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(key_path(key), key_path(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_number((*v)[i], index_path(key_path(key), i)));
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key())) throw ConfigError(key_path(it.key()), key_path(it.key()) + ": unknown key");
  }

 private:
  const ojson& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

template <class Enum, std::size_t N>
Enum parse_enum(const std::string& text, const std::array<Enum, N>& values, const std::string& path) {
  std::string allowed;
  for (Enum v : values) {
    if (to_string(v) == text) return v;
    allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(v));
  }
  throw ConfigError(path, path + ": '" + text + "' is not one of " + allowed);
}

inline TransferMode parse_mode(const std::string& text, const std::string& path) {
  return parse_enum(text, std::array{TransferMode::narrow_pulse, TransferMode::exact_convolution, TransferMode::resolvent},
                    path);
}

inline void positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ConfigError(path, path + ": must be > 0");
}

inline void non_negative(double v, const std::string& path) {
  if (!(v >= 0.0)) throw ConfigError(path, path + ": must be >= 0");
}


inline EnsembleConfig parse_ensemble(const ojson& j, const std::string& path) {
  ObjectReader r(j, path);
  EnsembleConfig e;
  const ojson& name = r.require("name");
  if (!name.is_string() || name.get<std::string>().empty())
    throw ConfigError(r.key_path("name"), r.key_path("name") + ": expected a non-empty string");
  e.name = name.get<std::string>();
  e.center_hz = r.required_number("center_hz");
  positive(e.center_hz, r.key_path("center_hz"));
  e.g_collective_hz = r.required_number("g_collective_hz");
  non_negative(e.g_collective_hz, r.key_path("g_collective_hz"));
  e.n_spins = r.number("n_spins", 0.0);
  non_negative(e.n_spins, r.key_path("n_spins"));
  e.line_shape = parse_enum(r.string("line_shape", "lorentzian"),
                            std::array{LineShape::lorentzian, LineShape::gaussian}, r.key_path("line_shape"));

  const ojson& lines = r.require("lines");
  const std::string lines_path = r.key_path("lines");
  if (!lines.is_array()) throw ConfigError(lines_path, lines_path + ": expected an array");
  if (lines.empty()) throw ConfigError(lines_path, lines_path + ": must contain at least one line");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    ObjectReader lr(lines[i], index_path(lines_path, i));
    LineConfig l;
    l.offset_hz = lr.number("offset_hz", 0.0);
    l.fwhm_hz = lr.required_number("fwhm_hz");
    positive(l.fwhm_hz, lr.key_path("fwhm_hz"));
    l.weight = lr.number("weight", 1.0);
    positive(l.weight, lr.key_path("weight"));
    lr.finish();
    e.lines.push_back(l);
  }

  if (const ojson* sats = r.find("satellites")) {
    const std::string sat_path = r.key_path("satellites");
    if (!sats->is_array()) throw ConfigError(sat_path, sat_path + ": expected an array");
    double total = 0.0;
    for (std::size_t i = 0; i < sats->size(); ++i) {
      ObjectReader sr((*sats)[i], index_path(sat_path, i));
      SatelliteConfig s;
      s.offset_hz = sr.required_number("offset_hz");
      s.weight = sr.required_number("weight");
      positive(s.weight, sr.key_path("weight"));
      sr.finish();
      total += s.weight;
      e.satellites.push_back(s);
    }
    if (!(total < 1.0)) throw ConfigError(sat_path, sat_path + ": satellite weights must sum to < 1");
  }

  if (const ojson* grid = r.find("grid")) {
    ObjectReader gr(*grid, r.key_path("grid"));
    e.n_nodes = gr.count("n_nodes", e.n_nodes);
    if (e.n_nodes < 2) throw ConfigError(gr.key_path("n_nodes"), gr.key_path("n_nodes") + ": must be >= 2");
    e.window_fwhm = gr.number("window_fwhm", e.window_fwhm);
    positive(e.window_fwhm, gr.key_path("window_fwhm"));
    e.min_offset_hz = gr.optional_number("min_offset_hz", std::nullopt);
    e.max_offset_hz = gr.optional_number("max_offset_hz", std::nullopt);
    if (e.min_offset_hz.has_value() != e.max_offset_hz.has_value())
      throw ConfigError(gr.key_path("min_offset_hz"), gr.key_path("min_offset_hz") + ": set both grid bounds or neither");
    if (e.min_offset_hz && !(*e.min_offset_hz < *e.max_offset_hz))
      throw ConfigError(gr.key_path("min_offset_hz"), gr.key_path("min_offset_hz") + ": must be < max_offset_hz");
    gr.finish();
  }
  r.finish();
  return e;
}

inline ojson to_ojson(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

inline std::string line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace detail

inline RunConfig parse_config_text(std::string_view text) {
  using detail::ObjectReader;
  using detail::ojson;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ConfigError("", "config text is empty");
  ojson root;
  try {
    root = ojson::parse(text.begin(), text.end());
  } catch (const ojson::parse_error& e) {
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ConfigError("", "config parse error at " + detail::line_of(text, e.byte) + ": " + what);
  }

  ObjectReader r(root, "");
  RunConfig c;
  const double version = r.number("schema_version", config_schema_version);
  if (version != config_schema_version)
    throw ConfigError("schema_version", "schema_version: only version " + std::to_string(config_schema_version) +
                                            " is supported");

  const ojson* ensembles = r.find("ensembles");
  if (!ensembles || !ensembles->is_array() || ensembles->empty())
    throw ConfigError("ensembles", "ensembles: must be a non-empty array");
  std::set<std::string, std::less<>> names;
  for (std::size_t i = 0; i < ensembles->size(); ++i) {
    auto e = detail::parse_ensemble((*ensembles)[i], detail::index_path("ensembles", i));
    if (!names.insert(e.name).second)
      throw ConfigError(detail::index_path("ensembles", i) + ".name",
                        detail::index_path("ensembles", i) + ".name: duplicate ensemble name '" + e.name + "'");
    c.ensembles.push_back(std::move(e));
  }

  if (const ojson* j = r.find("cavity")) {
    ObjectReader s(*j, "cavity");
    c.cavity.frequency_hz = s.optional_number("frequency_hz", std::nullopt);
    c.cavity.kappa_hz = s.optional_number("kappa_hz", std::nullopt);
    c.cavity.quality_factor = s.optional_number("quality_factor", c.cavity.kappa_hz ? std::nullopt : c.cavity.quality_factor);
    c.cavity.gamma_0_hz = s.number("gamma_0_hz", 0.0);
    if (c.cavity.frequency_hz) detail::positive(*c.cavity.frequency_hz, "cavity.frequency_hz");
    if (c.cavity.quality_factor.has_value() == c.cavity.kappa_hz.has_value())
      throw ConfigError("cavity.quality_factor", "cavity.quality_factor: give exactly one of quality_factor and kappa_hz");
    if (c.cavity.quality_factor) detail::positive(*c.cavity.quality_factor, "cavity.quality_factor");
    if (c.cavity.kappa_hz) detail::non_negative(*c.cavity.kappa_hz, "cavity.kappa_hz");
    detail::non_negative(c.cavity.gamma_0_hz, "cavity.gamma_0_hz");
    s.finish();
  }

  if (const ojson* j = r.find("pulse")) {
    ObjectReader s(*j, "pulse");
    c.pulse.shape = detail::parse_enum(s.string("shape", "lorentzian"),
                                       std::array{PulseShape::lorentzian, PulseShape::gaussian, PulseShape::rectangular},
                                       "pulse.shape");
    const bool rect = c.pulse.shape == PulseShape::rectangular;
    c.pulse.fwhm_hz = s.optional_number("fwhm_hz", rect ? std::nullopt : c.pulse.fwhm_hz);
    c.pulse.duration_s = s.optional_number("duration_s", std::nullopt);
    if (rect) {
      if (!c.pulse.duration_s) throw ConfigError("pulse.duration_s", "pulse.duration_s: required for a rectangular pulse");
      if (c.pulse.fwhm_hz) throw ConfigError("pulse.fwhm_hz", "pulse.fwhm_hz: a rectangular pulse is set by duration_s");
      detail::positive(*c.pulse.duration_s, "pulse.duration_s");
    } else {
      if (!c.pulse.fwhm_hz) throw ConfigError("pulse.fwhm_hz", "pulse.fwhm_hz: required");
      if (c.pulse.duration_s) throw ConfigError("pulse.duration_s", "pulse.duration_s: only for a rectangular pulse");
      detail::positive(*c.pulse.fwhm_hz, "pulse.fwhm_hz");
    }
    s.finish();
  }

  if (const ojson* j = r.find("qubit")) {
    ObjectReader s(*j, "qubit");
    auto unit = [&](std::string_view key, double fallback) {
      const double v = s.number(key, fallback);
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(s.key_path(key), s.key_path(key) + ": must lie in [0, 1]");
      return v;
    };
    c.qubit.swap_efficiency = unit("swap_efficiency", c.qubit.swap_efficiency);
    c.qubit.readout_fidelity = unit("readout_fidelity", c.qubit.readout_fidelity);
    c.qubit.saturation_guard = unit("saturation_guard", c.qubit.saturation_guard);
    c.qubit.baseline = unit("baseline", c.qubit.baseline);
    s.finish();
  }

  if (const ojson* j = r.find("spectrum")) {
    ObjectReader s(*j, "spectrum");
    c.spectrum.n_p = s.number("n_p", c.spectrum.n_p);
    detail::non_negative(c.spectrum.n_p, "spectrum.n_p");
    c.spectrum.span_hz = s.number("span_hz", c.spectrum.span_hz);
    detail::positive(c.spectrum.span_hz, "spectrum.span_hz");
    c.spectrum.points = s.count("points", c.spectrum.points);
    if (c.spectrum.points < 3) throw ConfigError("spectrum.points", "spectrum.points: must be >= 3");
    c.spectrum.tau_s = s.optional_number("tau_s", std::nullopt);
    if (c.spectrum.tau_s) detail::non_negative(*c.spectrum.tau_s, "spectrum.tau_s");
    c.spectrum.mode = detail::parse_mode(s.string("mode", std::string(to_string(c.spectrum.mode))), "spectrum.mode");
    s.finish();
  }

  if (const ojson* j = r.find("swap")) {
    ObjectReader s(*j, "swap");
    c.swap.t_max_s = s.number("t_max_s", c.swap.t_max_s);
    detail::positive(c.swap.t_max_s, "swap.t_max_s");
    c.swap.points = s.count("points", c.swap.points);
    if (c.swap.points < 3) throw ConfigError("swap.points", "swap.points: must be >= 3");
    s.finish();
  }

  if (const ojson* j = r.find("transfer")) {
    ObjectReader s(*j, "transfer");
    c.transfer.offset_hz = s.number("offset_hz", c.transfer.offset_hz);
    c.transfer.t_max_s = s.number("t_max_s", c.transfer.t_max_s);
    detail::positive(c.transfer.t_max_s, "transfer.t_max_s");
    c.transfer.points = s.count("points", c.transfer.points);
    if (c.transfer.points < 2) throw ConfigError("transfer.points", "transfer.points: must be >= 2");
    c.transfer.mode = detail::parse_mode(s.string("mode", std::string(to_string(c.transfer.mode))), "transfer.mode");
    c.transfer.compare_ode = s.boolean("compare_ode", c.transfer.compare_ode);
    s.finish();
  }

  if (const ojson* j = r.find("sensitivity")) {
    ObjectReader s(*j, "sensitivity");
    auto list = [&](std::string_view key, std::vector<double> fallback) {
      auto v = s.numbers(key, std::move(fallback));
      if (v.empty()) throw ConfigError(s.key_path(key), s.key_path(key) + ": must not be empty");
      for (std::size_t i = 0; i < v.size(); ++i) detail::positive(v[i], detail::index_path(s.key_path(key), i));
      return v;
    };
    c.sensitivity.g_hz = list("g_hz", c.sensitivity.g_hz);
    c.sensitivity.linewidth_t = list("linewidth_t", c.sensitivity.linewidth_t);
    c.sensitivity.n_threshold = list("n_threshold", c.sensitivity.n_threshold);
    c.sensitivity.hz_per_tesla = s.number("hz_per_tesla", c.sensitivity.hz_per_tesla);
    detail::positive(c.sensitivity.hz_per_tesla, "sensitivity.hz_per_tesla");
    c.sensitivity.kappa_hz = s.optional_number("kappa_hz", std::nullopt);
    if (c.sensitivity.kappa_hz) detail::positive(*c.sensitivity.kappa_hz, "sensitivity.kappa_hz");
    s.finish();
  }

  if (const ojson* j = r.find("numerics")) {
    ObjectReader s(*j, "numerics");
    auto& n = c.numerics;
    n.window_half_width_hz = s.number("window_half_width_hz", n.window_half_width_hz);
    n.step_hz = s.number("step_hz", n.step_hz);
    n.shift_hz = s.number("shift_hz", n.shift_hz);
    n.edge_tolerance = s.number("edge_tolerance", n.edge_tolerance);
    n.truncation_tolerance = s.number("truncation_tolerance", n.truncation_tolerance);
    n.ode_rtol = s.number("ode_rtol", n.ode_rtol);
    n.ode_atol = s.number("ode_atol", n.ode_atol);
    detail::non_negative(n.window_half_width_hz, "numerics.window_half_width_hz");
    detail::non_negative(n.step_hz, "numerics.step_hz");
    detail::non_negative(n.shift_hz, "numerics.shift_hz");
    if (!(n.edge_tolerance > 0.0 && n.edge_tolerance < 1.0))
      throw ConfigError("numerics.edge_tolerance", "numerics.edge_tolerance: must lie in (0, 1)");
    detail::positive(n.truncation_tolerance, "numerics.truncation_tolerance");
    detail::positive(n.ode_rtol, "numerics.ode_rtol");
    detail::positive(n.ode_atol, "numerics.ode_atol");
    s.finish();
  }

  if (const ojson* j = r.find("output")) {
    ObjectReader s(*j, "output");
    c.output_directory = s.string("directory", c.output_directory);
    if (c.output_directory.empty()) throw ConfigError("output.directory", "output.directory: must not be empty");
    s.finish();
  }
  r.finish();
  return c;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

/// The resolved configuration, defaults included, in canonical key order.
inline nlohmann::ordered_json effective_config(const RunConfig& c) {
  using detail::ojson;
  using detail::to_ojson;
  ojson root;
  root["schema_version"] = config_schema_version;
  ojson ensembles = ojson::array();
  for (const auto& e : c.ensembles) {
    ojson j;
    j["name"] = e.name;
    j["center_hz"] = e.center_hz;
    j["g_collective_hz"] = e.g_collective_hz;
    j["n_spins"] = e.n_spins;
    j["line_shape"] = to_string(e.line_shape);
    ojson lines = ojson::array();
    for (const auto& l : e.lines) lines.push_back({{"offset_hz", l.offset_hz}, {"fwhm_hz", l.fwhm_hz}, {"weight", l.weight}});
    j["lines"] = lines;
    ojson sats = ojson::array();
    for (const auto& s : e.satellites) sats.push_back({{"offset_hz", s.offset_hz}, {"weight", s.weight}});
    j["satellites"] = sats;
    j["grid"] = {{"n_nodes", e.n_nodes},
                 {"window_fwhm", e.window_fwhm},
                 {"min_offset_hz", to_ojson(e.min_offset_hz)},
                 {"max_offset_hz", to_ojson(e.max_offset_hz)}};
    ensembles.push_back(j);
  }
  root["ensembles"] = ensembles;
  root["cavity"] = {{"frequency_hz", to_ojson(c.cavity.frequency_hz)},
                    {"quality_factor", to_ojson(c.cavity.quality_factor)},
                    {"kappa_hz", to_ojson(c.cavity.kappa_hz)},
                    {"gamma_0_hz", c.cavity.gamma_0_hz}};
  root["pulse"] = {{"shape", to_string(c.pulse.shape)},
                   {"fwhm_hz", to_ojson(c.pulse.fwhm_hz)},
                   {"duration_s", to_ojson(c.pulse.duration_s)}};
  root["qubit"] = {{"swap_efficiency", c.qubit.swap_efficiency},
                   {"readout_fidelity", c.qubit.readout_fidelity},
                   {"saturation_guard", c.qubit.saturation_guard},
                   {"baseline", c.qubit.baseline}};
  root["spectrum"] = {{"n_p", c.spectrum.n_p},
                      {"span_hz", c.spectrum.span_hz},
                      {"points", c.spectrum.points},
                      {"tau_s", to_ojson(c.spectrum.tau_s)},
                      {"mode", to_string(c.spectrum.mode)}};
  root["swap"] = {{"t_max_s", c.swap.t_max_s}, {"points", c.swap.points}};
  root["transfer"] = {{"offset_hz", c.transfer.offset_hz},
                      {"t_max_s", c.transfer.t_max_s},
                      {"points", c.transfer.points},
                      {"mode", to_string(c.transfer.mode)},
                      {"compare_ode", c.transfer.compare_ode}};
  root["sensitivity"] = {{"g_hz", c.sensitivity.g_hz},
                         {"linewidth_t", c.sensitivity.linewidth_t},
                         {"n_threshold", c.sensitivity.n_threshold},
                         {"hz_per_tesla", c.sensitivity.hz_per_tesla},
                         {"kappa_hz", to_ojson(c.sensitivity.kappa_hz)}};
  root["numerics"] = {{"window_half_width_hz", c.numerics.window_half_width_hz},
                      {"step_hz", c.numerics.step_hz},
                      {"shift_hz", c.numerics.shift_hz},
                      {"edge_tolerance", c.numerics.edge_tolerance},
                      {"truncation_tolerance", c.numerics.truncation_tolerance},
                      {"ode_rtol", c.numerics.ode_rtol},
                      {"ode_atol", c.numerics.ode_atol}};
  root["output"] = {{"directory", c.output_directory}};
  return root;
}

inline std::string print_effective_config(const RunConfig& c) { return effective_config(c).dump(2) + "\n"; }

// Conversions from the Hz-valued configuration to library types.

inline SpinDistribution build_ensemble_distribution(const EnsembleConfig& e) {
  DistributionSpec spec;
  const double center = hz_to_angular(e.center_hz);
  for (const auto& l : e.lines)
    spec.lines.push_back({center + hz_to_angular(l.offset_hz), hz_to_angular(l.fwhm_hz), l.weight});
  for (const auto& s : e.satellites) spec.satellites.push_back({hz_to_angular(s.offset_hz), s.weight});
  spec.g_collective = hz_to_angular(e.g_collective_hz);
  spec.n_nodes = e.n_nodes;
  spec.window_fwhm = e.window_fwhm;
  spec.shape = e.line_shape;
  spec.n_spins = e.n_spins;
  if (e.min_offset_hz)
    spec.grid = GridSpec{center + hz_to_angular(*e.min_offset_hz), center + hz_to_angular(*e.max_offset_hz), e.n_nodes};
  return build_distribution(spec);
}

inline EnsembleCatalog build_catalog(const RunConfig& c) {
  EnsembleCatalog catalog;
  for (const auto& e : c.ensembles) catalog.add({e.name, hz_to_angular(e.center_hz), build_ensemble_distribution(e)});
  return catalog;
}

/// Cavity at the configured frequency, or tuned to `omega_center` when none is set.
inline CavityModel cavity_for(const RunConfig& c, double omega_center) {
  CavityModel cav;
  cav.omega_c = c.cavity.frequency_hz ? hz_to_angular(*c.cavity.frequency_hz) : omega_center;
  cav.kappa = c.cavity.kappa_hz ? hz_to_angular(*c.cavity.kappa_hz) : cav.omega_c / *c.cavity.quality_factor;
  cav.gamma_0 = hz_to_angular(c.cavity.gamma_0_hz);
  return cav;
}

inline PulseEnvelope pulse_envelope(const RunConfig& c) {
  switch (c.pulse.shape) {
    case PulseShape::lorentzian: return PulseEnvelope::lorentzian(hz_to_angular(*c.pulse.fwhm_hz));
    case PulseShape::gaussian: return PulseEnvelope::gaussian(hz_to_angular(*c.pulse.fwhm_hz));
    case PulseShape::rectangular: return PulseEnvelope::rectangular(*c.pulse.duration_s);
  }
  throw InvalidArgument("pulse_envelope: unknown shape");
}

inline ContourOptions contour_options(const RunConfig& c) {
  ContourOptions o;
  o.half_width = hz_to_angular(c.numerics.window_half_width_hz);
  o.step = hz_to_angular(c.numerics.step_hz);
  o.shift = hz_to_angular(c.numerics.shift_hz);
  o.edge_tolerance = c.numerics.edge_tolerance;
  o.truncation_tolerance = c.numerics.truncation_tolerance;
  return o;
}

inline PropagationOptions propagation_options(const RunConfig& c) {
  PropagationOptions o;
  o.rtol = c.numerics.ode_rtol;
  o.atol = c.numerics.ode_atol;
  return o;
}

}  // namespace qesr
