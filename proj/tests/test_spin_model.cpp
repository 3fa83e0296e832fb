#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fixtures.hpp"

using namespace qesr;
using namespace qesr::test;

namespace {

double weight_sum(const SpinDistribution& d) {
  double s = 0.0;
  for (double w : d.node_weights()) s += w;
  return s;
}

// Piecewise adaptive Gauss–Kronrod over [a, b], split at the line centers
// so each panel sees at most one peak.
template <class F>
double integrate(F f, double a, double b, std::vector<double> breaks) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    const double lo = std::max(a, breaks[i - 1]);
    const double hi = std::min(b, breaks[i]);
    if (hi > lo) total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
  }
  return total;
}

}  // namespace

TEST(SpinModel, PlusITripletBuilds) {
  EnsembleCatalog catalog;
  const double c = hz_to_angular(plus_I.center_hz);
  catalog.add({"+I", c, triplet(plus_I)});
  const auto& d = catalog.at("+I").distribution;
  ASSERT_EQ(d.lines().size(), 3u);
  EXPECT_NEAR(angular_to_hz(d.g_collective()), 2.9e6, 1e-6);
  for (const auto& line : d.lines()) {
    EXPECT_NEAR(angular_to_hz(line.fwhm), 1.6e6, 1e-6);
    EXPECT_NEAR(line.weight, 1.0 / 3.0, 1e-15);
  }
  EXPECT_NEAR(angular_to_hz(d.lines()[2].center - d.lines()[1].center), 2.2e6, 1e-3);
  EXPECT_NEAR(weight_sum(d), 1.0, 1e-9);
  EXPECT_TRUE(d.warnings().empty());
}

TEST(SpinModel, SingleLineWeightsSymmetricAndNormalized) {
  DistributionSpec spec;
  spec.lines = {{1000.0, 3.0, 1.0}};
  spec.g_collective = 1.0;
  spec.n_nodes = 2001;
  const auto d = build_distribution(spec);
  const auto w = d.node_weights();
  const auto x = d.node_frequencies();
  EXPECT_NEAR(weight_sum(d), 1.0, 1e-12);
  for (std::size_t j = 0; j < w.size(); ++j) {
    EXPECT_NEAR(w[j], w[w.size() - 1 - j], 1e-15);
    EXPECT_NEAR(x[j] - 1000.0, 1000.0 - x[x.size() - 1 - j], 1e-9);
  }
}

TEST(SpinModel, UnnormalizedMassMatchesQuadratureOracleOnWindow) {
  auto spec = triplet_spec(plus_III);
  const double c = hz_to_angular(plus_III.center_hz);
  const double half = hz_to_angular(25 * MHz);
  spec.grid = GridSpec{c - half, c + half, 20001};
  const auto d = build_distribution(spec);

  std::vector<double> centers;
  for (const auto& l : d.lines()) centers.push_back(l.center);
  auto rho = [&](double w) { return density_at(d, w); };
  const double oracle = integrate(rho, c - half, c + half, centers);
  EXPECT_NEAR(d.unnormalized_mass(), oracle, 1e-6 * oracle);

  // Second route: closed-form Lorentzian mass on the window.
  double closed = 0.0;
  for (const auto& l : d.lines()) {
    const double h = 0.5 * l.fwhm;
    closed += l.weight / std::numbers::pi * (std::atan((c + half - l.center) / h) - std::atan((c - half - l.center) / h));
  }
  EXPECT_NEAR(oracle, closed, 1e-10);
}

// The ±25 MHz window truncates about 3% of three 2.4 MHz Lorentzians, so the
// trapezoidal mass before renormalization is ≈0.969, not 1 ± 0.5%.
TEST(SpinModel, UnnormalizedMassWithinHalfPercentOfOne) {
  auto spec = triplet_spec(plus_III);
  const double c = hz_to_angular(plus_III.center_hz);
  const double half = hz_to_angular(25 * MHz);
  spec.grid = GridSpec{c - half, c + half, 20001};
  const auto d = build_distribution(spec);
  EXPECT_NEAR(d.unnormalized_mass(), 1.0, 0.005);
}

TEST(SpinModel, DensityAtLorentzianPeak) {
  DistributionSpec spec;
  spec.lines = {{50.0, 4.0, 1.0}};
  const auto d = build_distribution(spec);
  EXPECT_DOUBLE_EQ(density_at(d, 50.0), 2.0 / (std::numbers::pi * 4.0));
  EXPECT_LT(density_at(d, 50.0 + 1e3 * 4.0 + 1.0), 1e-5 * density_at(d, 50.0));
  EXPECT_LT(density_at(d, 50.0 - 1e3 * 4.0 - 1.0), 1e-5 * density_at(d, 50.0));
}

TEST(SpinModel, DensityAtMatchesThreeLorentzianOracle) {
  const auto d = triplet(plus_III);
  const double c = hz_to_angular(plus_III.center_hz);
  const double h = 0.5 * hz_to_angular(plus_III.fwhm_hz);
  const double s = hz_to_angular(hyperfine_splitting_hz);
  double oracle = 0.0;
  for (double x : {-s, 0.0, s}) oracle += (1.0 / 3.0) * h / (std::numbers::pi * (x * x + h * h));
  EXPECT_NEAR(density_at(d, c), oracle, 1e-6 * oracle);
}

TEST(SpinModel, DensityAtRejectsNodeOnlyDistribution) {
  const auto d = degenerate(1.0, 1.0);
  EXPECT_THROW(density_at(d, 1.0), InvalidArgument);
}

TEST(SpinModel, CollectiveCouplingOfIdenticalSpins) {
  const std::size_t n = 400;
  const double g = 2.5;
  std::vector<double> omega(n), weight(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) omega[j] = static_cast<double>(j);
  const auto d = SpinDistribution::from_nodes(omega, weight, g * std::sqrt(static_cast<double>(n)));
  for (double gj : d.node_couplings()) EXPECT_NEAR(gj, g, 1e-12);
  EXPECT_NEAR(collective_coupling(d), g * std::sqrt(400.0), 1e-12);
}

TEST(SpinModel, CollectiveCouplingPlusIII) {
  EXPECT_NEAR(angular_to_hz(collective_coupling(triplet(plus_III))), 3.8e6, 1e-6);
}

TEST(SpinModel, CollectiveCouplingReconstructedFromRandomWeights) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> omega(1000), weight(1000);
  for (std::size_t j = 0; j < omega.size(); ++j) {
    omega[j] = static_cast<double>(j) * 0.37;
    weight[j] = u(rng);
  }
  const double g = 2.0 * std::numbers::pi * 1e6;
  const auto d = SpinDistribution::from_nodes(omega, weight, g);
  EXPECT_NEAR(weight_sum(d), 1.0, 1e-9);
  long double sum = 0.0L;
  for (double gj : d.node_couplings()) sum += static_cast<long double>(gj) * gj;
  EXPECT_NEAR(static_cast<double>(std::sqrt(sum)) / g, 1.0, 1e-9);
}

TEST(SpinModel, NodesStrictlyIncreasingAndNormalized) {
  for (const auto& e : {plus_I, plus_III}) {
    const auto d = triplet(e, 3001);
    const auto x = d.node_frequencies();
    for (std::size_t j = 1; j < x.size(); ++j) ASSERT_GT(x[j], x[j - 1]);
    EXPECT_NEAR(weight_sum(d), 1.0, 1e-9);
  }
}

TEST(SpinModel, SatellitesConserveWeight) {
  auto spec = triplet_spec(plus_I);
  spec.satellites = {{hz_to_angular(13e6), 0.011}, {hz_to_angular(-13e6), 0.011}};
  const auto d = build_distribution(spec);
  double main = 0.0, total = 0.0;
  for (std::size_t i = 0; i < d.lines().size(); ++i) {
    total += d.lines()[i].weight;
    if (i % 3 == 0) main += d.lines()[i].weight;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(main, 1.0 - 0.022, 1e-12);
  EXPECT_NEAR(weight_sum(d), 1.0, 1e-9);
}

TEST(SpinModel, RiemannSumConvergesToDensityIntegral) {
  DistributionSpec spec;
  const double w = 2.0;
  spec.lines = {{0.0, w, 0.6}, {3.0, w, 0.4}};
  auto f = [](double x) { return std::exp(-0.05 * (x - 1.0) * (x - 1.0)) * (1.0 + 0.1 * x); };
  const double span = 1e5;
  auto pt = [&](double x) { return detail::mixture(spec.shape, spec.lines, x) * f(x); };
  const double exact = integrate(pt, -span, span, {0.0, 1.0, 3.0});

  double previous_error = 1.0;
  for (auto [window, nodes] : {std::pair{8.0, 2000}, {64.0, 20000}, {512.0, 200000}}) {
    spec.window_fwhm = window;
    spec.n_nodes = static_cast<std::size_t>(nodes);
    const auto d = build_distribution(spec);
    double sum = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) sum += d.node_weights()[j] * f(d.node_frequencies()[j]);
    const double error = std::abs(sum - exact) / exact;
    EXPECT_LT(error, previous_error);
    previous_error = error;
  }
  EXPECT_LT(previous_error, 0.01);
}

TEST(SpinModel, RejectsInvalidSpecs) {
  DistributionSpec empty;
  EXPECT_THROW(build_distribution(empty), InvalidArgument);

  auto spec = triplet_spec(plus_I);
  spec.lines[1].fwhm = -1.0;
  try {
    build_distribution(spec);
    FAIL() << "negative fwhm accepted";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }

  spec = triplet_spec(plus_I);
  spec.lines[2].weight = 0.0;
  EXPECT_THROW(build_distribution(spec), InvalidArgument);

  spec = triplet_spec(plus_I);
  spec.grid = GridSpec{0.0, 1.0, 1};
  EXPECT_THROW(build_distribution(spec), InvalidArgument);
}

TEST(SpinModel, WarnsWhenWindowMissesLineTails) {
  auto spec = triplet_spec(plus_I);
  const double c = hz_to_angular(plus_I.center_hz);
  spec.grid = GridSpec{c - hz_to_angular(3 * MHz), c + hz_to_angular(3 * MHz), 1001};
  const auto d = build_distribution(spec);
  EXPECT_FALSE(d.warnings().empty());
  EXPECT_NEAR(weight_sum(d), 1.0, 1e-9);
}

TEST(SpinModel, CatalogRejectsDuplicates) {
  EnsembleCatalog catalog;
  catalog.add({"+I", 1.0, degenerate(1.0, 1.0)});
  EXPECT_THROW(catalog.add({"+I", 2.0, degenerate(2.0, 1.0)}), InvalidArgument);
  EXPECT_THROW(catalog.add({"", 2.0, degenerate(2.0, 1.0)}), InvalidArgument);
  EXPECT_THROW(catalog.at("+III"), InvalidArgument);
}

TEST(SpinModel, DistributionCsv) {
  const auto d = SpinDistribution::from_nodes({1.0, 2.5}, {1.0, 3.0}, 1.0);
  std::ostringstream out;
  write_distribution_csv(out, d);
  EXPECT_EQ(out.str(), "omega_rad_per_s,weight\n1,0.25\n2.5,0.75\n");
}
