#pragma once

// Inhomogeneously broadened spin ensembles.
//
// A SpinDistribution holds the coupling-weighted spectral density
//
//     ρ(ω) = Σ_j (g_j² / g_K²) δ(ω − ω_j),      g_K = (Σ_j g_j²)^{1/2},
//
// in two forms: the analytic line mixture it was built from (used by
// density_at and by the narrow-pulse transfer factor) and a uniform grid of
// nodes ω_j carrying the discrete weights g_j²/g_K² (used by every sum over
// spins). All frequencies are angular (rad/s) and absolute.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qesr/errors.hpp"
#include "qesr/io.hpp"

namespace qesr {

enum class LineShape { lorentzian, gaussian };

inline std::string_view to_string(LineShape shape) {
  return shape == LineShape::lorentzian ? "lorentzian" : "gaussian";
}

/// One hyperfine (or satellite) line: unit-area profile scaled by `weight`.
struct SpinLine {
  double center = 0.0;  // rad/s
  double fwhm = 0.0;    // rad/s
  double weight = 1.0;

  friend bool operator==(const SpinLine&, const SpinLine&) = default;
};

/// Satellite replica added next to every main line, e.g. from nearby ¹³C.
/// `weight` is the fraction of each main line moved into the replica.
struct Satellite {
  double offset = 0.0;  // rad/s, relative to the parent line center
  double weight = 0.0;
};

struct GridSpec {
  double omega_min = 0.0;
  double omega_max = 0.0;
  std::size_t n_nodes = 0;
};

struct DistributionSpec {
  std::vector<SpinLine> lines;
  double g_collective = 0.0;  // rad/s
  std::vector<Satellite> satellites;
  /// Explicit grid. When unset the window is the union of line centers
  /// ± window_fwhm × fwhm, sampled with `n_nodes` points.
  std::optional<GridSpec> grid;
  std::size_t n_nodes = 5000;
  double window_fwhm = 8.0;
  LineShape shape = LineShape::lorentzian;
  double n_spins = 0.0;  // reporting only
};

namespace detail {

/// Unit-area line profile evaluated at detuning x.
inline double line_profile(LineShape shape, double x, double fwhm) {
  if (shape == LineShape::lorentzian) {
    const double half = 0.5 * fwhm;
    return half / (std::numbers::pi * (x * x + half * half));
  }
  const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double mixture(LineShape shape, std::span<const SpinLine> lines, double omega) {
  double sum = 0.0;
  for (const auto& line : lines) sum += line.weight * line_profile(shape, omega - line.center, line.fwhm);
  return sum;
}

}  // namespace detail

class SpinDistribution {
 public:
  /// Distribution given directly by its nodes (degenerate ensembles, explicit
  /// spin lists). Weights are renormalized to sum to one. Such a
  /// distribution has no analytic line shape, so density_at rejects it.
  static SpinDistribution from_nodes(std::vector<double> omegas, std::vector<double> weights,
                                     double g_collective, double n_spins = 0.0) {
    if (omegas.empty()) throw InvalidArgument("from_nodes: node list is empty");
    if (omegas.size() != weights.size())
      throw InvalidArgument("from_nodes: frequency and weight lists differ in length");
    if (!(g_collective >= 0.0) || !std::isfinite(g_collective))
      throw InvalidArgument("from_nodes: g_collective must be finite and >= 0");
    for (std::size_t j = 1; j < omegas.size(); ++j) {
      if (!(omegas[j] > omegas[j - 1]))
        throw InvalidArgument("from_nodes: node frequencies must be strictly increasing (index " +
                              std::to_string(j) + ")");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      if (!(weights[j] >= 0.0) || !std::isfinite(weights[j]))
        throw InvalidArgument("from_nodes: weight " + std::to_string(j) + " must be finite and >= 0");
      total += weights[j];
    }
    if (!(total > 0.0)) throw InvalidArgument("from_nodes: weights sum to zero");
    for (auto& w : weights) w /= total;

    SpinDistribution dist;
    dist.omega_ = std::move(omegas);
    dist.weight_ = std::move(weights);
    dist.g_ = g_collective;
    dist.n_spins_ = n_spins;
    dist.mass_ = total;
    dist.finish();
    return dist;
  }

  std::span<const SpinLine> lines() const noexcept { return lines_; }
  LineShape shape() const noexcept { return shape_; }
  bool has_line_shape() const noexcept { return !lines_.empty(); }

  std::span<const double> node_frequencies() const noexcept { return omega_; }
  std::span<const double> node_weights() const noexcept { return weight_; }
  /// g_j = g_K √weight_j.
  std::span<const double> node_couplings() const noexcept { return coupling_; }
  std::size_t size() const noexcept { return omega_.size(); }

  double g_collective() const noexcept { return g_; }
  double n_spins() const noexcept { return n_spins_; }
  /// Trapezoidal ∫ρ dω over the grid before renormalization.
  double unnormalized_mass() const noexcept { return mass_; }
  double narrowest_fwhm() const noexcept {
    double narrowest = 0.0;
    for (const auto& l : lines_) narrowest = narrowest == 0.0 ? l.fwhm : std::min(narrowest, l.fwhm);
    return narrowest;
  }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Same spectral shape with a different collective coupling.
  SpinDistribution with_coupling(double g_collective) const {
    if (!(g_collective >= 0.0)) throw InvalidArgument("with_coupling: g_collective must be >= 0");
    SpinDistribution copy = *this;
    copy.g_ = g_collective;
    copy.finish();
    return copy;
  }

 private:
  friend SpinDistribution build_distribution(const DistributionSpec& spec);

  void finish() {
    coupling_.resize(weight_.size());
    for (std::size_t j = 0; j < weight_.size(); ++j) coupling_[j] = g_ * std::sqrt(weight_[j]);
  }

  std::vector<SpinLine> lines_;
  LineShape shape_ = LineShape::lorentzian;
  std::vector<double> omega_;
  std::vector<double> weight_;
  std::vector<double> coupling_;
  double g_ = 0.0;
  double n_spins_ = 0.0;
  double mass_ = 1.0;
  std::vector<std::string> warnings_;
};

/// Samples the line mixture on a uniform grid with trapezoidal weights and
/// renormalizes them to sum to one. Satellites take `weight` of every main
/// line each; main lines keep the remaining 1 − Σ weight.
inline SpinDistribution build_distribution(const DistributionSpec& spec) {
  if (spec.lines.empty()) throw InvalidArgument("build_distribution: line list is empty");
  if (!(spec.g_collective >= 0.0) || !std::isfinite(spec.g_collective))
    throw InvalidArgument("build_distribution: g_collective must be finite and >= 0");

  double total_weight = 0.0;
  for (std::size_t i = 0; i < spec.lines.size(); ++i) {
    const auto& line = spec.lines[i];
    if (!(line.fwhm > 0.0) || !std::isfinite(line.fwhm))
      throw InvalidArgument("build_distribution: line " + std::to_string(i) + " fwhm must be > 0");
    if (!(line.weight > 0.0) || !std::isfinite(line.weight))
      throw InvalidArgument("build_distribution: line " + std::to_string(i) + " weight must be > 0");
    if (!std::isfinite(line.center))
      throw InvalidArgument("build_distribution: line " + std::to_string(i) + " center is not finite");
    total_weight += line.weight;
  }

  double satellite_fraction = 0.0;
  for (std::size_t s = 0; s < spec.satellites.size(); ++s) {
    const auto& sat = spec.satellites[s];
    if (!(sat.weight > 0.0) || !std::isfinite(sat.offset))
      throw InvalidArgument("build_distribution: satellite " + std::to_string(s) +
                            " needs weight > 0 and a finite offset");
    satellite_fraction += sat.weight;
  }
  if (!(satellite_fraction < 1.0))
    throw InvalidArgument("build_distribution: satellite weights must sum to < 1");

  SpinDistribution dist;
  dist.shape_ = spec.shape;
  dist.g_ = spec.g_collective;
  dist.n_spins_ = spec.n_spins;
  for (const auto& line : spec.lines) {
    const double w = line.weight / total_weight;
    dist.lines_.push_back({line.center, line.fwhm, w * (1.0 - satellite_fraction)});
    for (const auto& sat : spec.satellites)
      dist.lines_.push_back({line.center + sat.offset, line.fwhm, w * sat.weight});
  }

  GridSpec grid;
  if (spec.grid) {
    grid = *spec.grid;
  } else {
    if (!(spec.window_fwhm > 0.0)) throw InvalidArgument("build_distribution: window_fwhm must be > 0");
    grid.omega_min = dist.lines_.front().center;
    grid.omega_max = grid.omega_min;
    for (const auto& line : dist.lines_) {
      grid.omega_min = std::min(grid.omega_min, line.center - spec.window_fwhm * line.fwhm);
      grid.omega_max = std::max(grid.omega_max, line.center + spec.window_fwhm * line.fwhm);
    }
    grid.n_nodes = spec.n_nodes;
  }
  if (grid.n_nodes < 2) throw InvalidArgument("build_distribution: grid needs n_nodes >= 2");
  if (!(grid.omega_min < grid.omega_max))
    throw InvalidArgument("build_distribution: grid needs omega_min < omega_max");

  for (std::size_t i = 0; i < dist.lines_.size(); ++i) {
    const auto& line = dist.lines_[i];
    if (line.center - 5.0 * line.fwhm < grid.omega_min || line.center + 5.0 * line.fwhm > grid.omega_max) {
      dist.warnings_.push_back("grid window does not cover line " + std::to_string(i) +
                               " center +/- 5 fwhm; truncated weight is renormalized away");
    }
  }

  const std::size_t n = grid.n_nodes;
  const double step = (grid.omega_max - grid.omega_min) / static_cast<double>(n - 1);
  dist.omega_.resize(n);
  dist.weight_.resize(n);
  double mass = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double omega = j + 1 == n ? grid.omega_max : grid.omega_min + step * static_cast<double>(j);
    const double trapezoid = (j == 0 || j + 1 == n) ? 0.5 * step : step;
    dist.omega_[j] = omega;
    dist.weight_[j] = detail::mixture(dist.shape_, dist.lines_, omega) * trapezoid;
    mass += dist.weight_[j];
  }
  if (!(mass > 0.0)) throw InvalidArgument("build_distribution: grid carries no spectral weight");
  for (auto& w : dist.weight_) w /= mass;
  dist.mass_ = mass;
  dist.finish();
  return dist;
}

/// Continuous ρ(ω) of the analytic line mixture (1/(rad/s)), independent of
/// the grid and of its renormalization.
inline double density_at(const SpinDistribution& dist, double omega) {
  if (!dist.has_line_shape())
    throw InvalidArgument("density_at: distribution was built from nodes and has no line shape");
  return detail::mixture(dist.shape(), dist.lines(), omega);
}

/// g_K. Equals (Σ_j g_j²)^{1/2} over the nodes by construction.
inline double collective_coupling(const SpinDistribution& dist) noexcept { return dist.g_collective(); }

struct Ensemble {
  std::string name;
  double omega_center = 0.0;  // ω_K, rad/s
  SpinDistribution distribution;
};

class EnsembleCatalog {
 public:
  void add(Ensemble ensemble) {
    if (ensemble.name.empty()) throw InvalidArgument("EnsembleCatalog: ensemble name is empty");
    if (index_.contains(ensemble.name))
      throw InvalidArgument("EnsembleCatalog: duplicate ensemble name '" + ensemble.name + "'");
    index_.emplace(ensemble.name, entries_.size());
    entries_.push_back(std::move(ensemble));
  }

  const Ensemble& at(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw InvalidArgument("EnsembleCatalog: unknown ensemble '" + std::string(name) + "'");
    return entries_[it->second];
  }

  bool contains(std::string_view name) const { return index_.contains(std::string(name)); }
  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

 private:
  std::vector<Ensemble> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// CSV with header `omega_rad_per_s,weight`.
inline void write_distribution_csv(std::ostream& out, const SpinDistribution& dist) {
  out << "omega_rad_per_s,weight\n";
  const auto omega = dist.node_frequencies();
  const auto weight = dist.node_weights();
  for (std::size_t j = 0; j < omega.size(); ++j) detail::write_row(out, {omega[j], weight[j]});
}

}  // namespace qesr
