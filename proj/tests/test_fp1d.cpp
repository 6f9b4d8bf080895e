#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neurodens/fp1d.hpp"

using namespace neurodens;

namespace {

DensityField1D unit_gaussian(const PotentialGrid& g, double mean, double sd) {
  DensityField1D p;
  p.values = gaussian_cells(mean, sd, g.v_min(), g.dv(), g.n_v());
  normalize(p.values, g.dv());
  return p;
}

double rel_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::abs(a[i] - b[i]);
    den += std::abs(a[i]);
  }
  return num / den;
}

}  // namespace

TEST_CASE("fp1d: OU stationary density when the threshold is removed") {
  // Threshold far above mu: the absorbing boundary is inert and the
  // stationary density is the OU Gaussian N(mu, sigma^2/2).
  const double mu = 0.0, sigma = 0.4;
  const double sd = sigma / std::sqrt(2.0);
  PotentialGrid g(mu - 8 * sd, mu, mu + 8 * sd, 400);
  Fp1dSolver solver(g, sigma);
  auto [p, r] = solver.stationary(Stimulus::constant(mu, sigma), 1e-3);

  auto exact = gaussian_cells(mu, sd, g.v_min(), g.dv(), g.n_v());
  CHECK(rel_l1(exact, p.values) < 1e-3);
  CHECK(r < 1e-9);
  CHECK(mass(p, g) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fp1d: zero initial mass stays zero") {
  PotentialGrid g(-4.0, 0.5, 1.0, 200);
  Fp1dSolver solver(g, 0.15);
  DensityField1D p;
  p.values.assign(200, 0.0);
  auto s = Stimulus::constant(3.0, 0.15);
  for (int k = 0; k < 100; ++k) {
    const double r = solver.step(p, s, 1e-3);
    CHECK(r == 0.0);
  }
  CHECK(mass(p, g) == 0.0);
}

TEST_CASE("fp1d: exact per-step conservation and positivity (fig 2 regime)") {
  PotentialGrid g(-4.0, 0.5, 1.0, 400);
  Fp1dSolver solver(g, 0.15);
  auto s = Stimulus::constant(3.0, 0.15);
  DensityField1D p = unit_gaussian(g, 0.0, 0.2);
  double m_prev = mass(p, g);
  for (int k = 0; k < 2000; ++k) {
    solver.step(p, s, 1e-3);
    const double m = mass(p, g);
    CHECK(std::abs(m - m_prev) < 1e-12);
    m_prev = m;
    for (double v : p.values) REQUIRE(v >= 0.0);
  }
  CHECK(std::abs(m_prev - 1.0) < 1e-6);
}

TEST_CASE("fp1d: stationary profile is a fixed point of solve") {
  PotentialGrid g(-4.0, 0.5, 1.0, 300);
  Fp1dSolver solver(g, 0.15);
  auto s = Stimulus::constant(3.0, 0.15);
  auto [pbar, rbar] = solver.stationary(s, 1e-3);
  auto run = solver.solve(pbar, s, 0.5, 1e-3);
  for (double r : run.rates.rates)
    CHECK(r == doctest::Approx(rbar).epsilon(1e-6));
}

TEST_CASE("fp1d: small-sigma stationary rate approaches noise-free period") {
  // Deterministic passage time ln((mu - v_r)/(mu - 1)) = ln(2.5/2).
  const double mu = 3.0, v_r = 0.5;
  PotentialGrid g(-1.0, v_r, 1.0, 2000);
  Fp1dSolver solver(g, 0.05);
  auto [pbar, rbar] = solver.stationary(Stimulus::constant(mu, 0.05), 2e-4);
  const double r_det = 1.0 / std::log((mu - v_r) / (mu - 1.0));
  CHECK(rbar == doctest::Approx(r_det).epsilon(0.05));
}

TEST_CASE("fp1d: firing rate is nonnegative along a transient") {
  PotentialGrid g(-4.0, 0.5, 1.0, 300);
  Fp1dSolver solver(g, 0.2);
  auto s = Stimulus::waveform({{0.0, 2.0}, {1.0, 4.0}, {2.0, 2.5}}, 0.2);
  DensityField1D p = unit_gaussian(g, 0.0, 0.2);
  auto run = solver.solve(p, s, 2.0, 1e-3);
  for (double r : run.rates.rates) CHECK(r >= 0.0);
}

TEST_CASE("fp1d: grid refinement improves accuracy by >= 1.8x") {
  // Transient comparison against a fine reference, projected onto the
  // coarse cells (nested grids).
  const double sigma = 0.15, horizon = 0.3, v_min = -2.0;
  auto s = Stimulus::constant(3.0, sigma);

  PotentialGrid g0(v_min, 0.5, 1.0, 100);
  Fp1dSolver s0(g0, sigma);
  DensityField1D p0 = unit_gaussian(g0, 0.3, 0.15);
  for (int k = 0; k < 75; ++k) s0.step(p0, s, 4e-3);

  PotentialGrid g1(v_min, 0.5, 1.0, 200);
  Fp1dSolver s1(g1, sigma);
  DensityField1D p1 = unit_gaussian(g1, 0.3, 0.15);
  for (int k = 0; k < 150; ++k) s1.step(p1, s, 2e-3);

  PotentialGrid g2(v_min, 0.5, 1.0, 800);
  Fp1dSolver s2(g2, sigma);
  DensityField1D p2 = unit_gaussian(g2, 0.3, 0.15);
  for (int k = 0; k < 1200; ++k) s2.step(p2, s, 2.5e-4);

  // Project the reference onto each coarse grid by cell averaging.
  auto project = [&](const std::vector<double>& fine, int factor) {
    std::vector<double> out(fine.size() / factor, 0.0);
    for (std::size_t i = 0; i < fine.size(); ++i) out[i / factor] += fine[i];
    for (double& v : out) v /= factor;
    return out;
  };
  const double e0 = rel_l1(project(p2.values, 8), p0.values);
  const double e1 = rel_l1(project(p2.values, 4), p1.values);
  CHECK(e0 / e1 >= 1.8);
}
