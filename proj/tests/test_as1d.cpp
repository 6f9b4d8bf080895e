#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neurodens/as1d.hpp"

using namespace neurodens;

namespace {

double rel_l1(const std::vector<double>& ref, const std::vector<double>& x) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    num += std::abs(ref[i] - x[i]);
    den += std::abs(ref[i]);
  }
  return num / den;
}

// Fig. 5 hazard: S(a) = exp(h - V(a)), V(a) = -log(1 - exp(-a/tau)).
double fig5_hazard(double a, double tau, double h) {
  return std::exp(h) * (1.0 - std::exp(-a / tau));
}

}  // namespace

TEST_CASE("as1d: zero hazard is a pure conservative shift") {
  AgeGrid g(2.0, 400);
  As1dSolver solver(g);
  DensityAge n;
  n.values.assign(400, 0.0);
  n.values[10] = 1.0 / g.da();  // unit mass in one cell
  HazardFn zero = [](double, double) { return 0.0; };
  for (int k = 0; k < 100; ++k) {
    const double r = solver.step(n, zero, g.da());
    CHECK(r == 0.0);
  }
  CHECK(n.values[110] == doctest::Approx(1.0 / g.da()));
  CHECK(mass(n, g) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("as1d: constant hazard converges to the exponential profile") {
  const double lam = 1.0;
  AgeGrid g(20.0, 4000);  // P(a_max) = e^-20 ~ 2e-9
  const double dt = g.da();
  As1dSolver solver(g);
  DensityAge n;
  // start from a broad (normalized) triangle
  n.values.assign(g.n_a(), 0.0);
  for (int k = 0; k < 400; ++k) n.values[k] = 400 - k;
  normalize(n.values, g.da());
  HazardFn S = [&](double, double) { return lam; };
  double r = 0.0;
  for (int k = 0; k < 12000; ++k) r = solver.step(n, S, dt);

  std::vector<double> exact(g.n_a());
  for (int k = 0; k < g.n_a(); ++k) exact[k] = lam * std::exp(-lam * g.center(k));
  CHECK(rel_l1(exact, n.values) < 1e-3);
  // discrete stationary rate: every parcel loses the factor e^{-lam dt} per
  // step, so r = (1 - e^{-lam dt}) / dt exactly
  CHECK(r == doctest::Approx(-std::expm1(-lam * dt) / dt).epsilon(1e-5));
  CHECK(mass(n, g) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("as1d: boundary consistency n(t,0) = r(t)") {
  AgeGrid g(10.0, 1000);
  As1dSolver solver(g);
  DensityAge n;
  n.values = gaussian_cells(1.0, 0.25, 0.0, g.da(), g.n_a());
  normalize(n.values, g.da());
  HazardFn S = [&](double, double a) { return fig5_hazard(a, 30.0, 3.0); };
  for (int k = 0; k < 200; ++k) {
    const double r = solver.step(n, S, g.da());
    CHECK(n.values[0] == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("as1d: delta initial cohort vs analytic renewal solution") {
  // With S = lam, r(t) = lam identically, so for a < t the density is
  // lam*exp(-lam*a) while the initial cohort survives at a = t with mass
  // exp(-lam*t).
  const double lam = 2.0;
  AgeGrid g(5.0, 1000);
  const double dt = g.da();
  As1dSolver solver(g);
  DensityAge n;
  n.values.assign(g.n_a(), 0.0);
  n.values[0] = 1.0 / g.da();
  HazardFn S = [&](double, double) { return lam; };
  const int steps = 300;  // t = 1.5
  for (int k = 0; k < steps; ++k) solver.step(n, S, dt);

  // cohort cell
  CHECK(n.values[steps] * g.da() ==
        doctest::Approx(std::exp(-lam * steps * dt)).epsilon(5e-3));
  // renewal part (skip the few cells right at the cohort front)
  for (int k = 10; k + 5 < steps; k += 25) {
    CHECK(n.values[k] ==
          doctest::Approx(lam * std::exp(-lam * g.center(k))).epsilon(5e-3));
  }
}

TEST_CASE("as1d: requires da == dt and flags age truncation") {
  AgeGrid g(1.0, 100);
  As1dSolver solver(g);
  DensityAge n;
  n.values.assign(100, 0.0);
  n.values[99] = 1.0;  // mass about to fall off the age domain
  HazardFn zero = [](double, double) { return 0.0; };
  CHECK_THROWS_AS(solver.step(n, zero, 0.5 * g.da()), ConfigError);
  CHECK_THROWS_AS(solver.step(n, zero, g.da()), NumericalError);
}

TEST_CASE("survivor_from_hazard: constant, zero, fig5 closed form") {
  AgeGrid g(8.0, 800);
  const double lam = 0.7;
  auto P1 = survivor_from_hazard([&](double) { return lam; }, g);
  CHECK(P1[0] == 1.0);
  CHECK(P1[400] == doctest::Approx(std::exp(-lam * g.face(400))).epsilon(1e-12));

  auto P0 = survivor_from_hazard([](double) { return 0.0; }, g);
  for (double v : P0) CHECK(v == 1.0);

  // Fig. 5 hazard: P(a) = exp(-e^h (a - tau (1 - e^{-a/tau}))).
  const double tau = 30.0, h = 3.0;
  auto P =
      survivor_from_hazard([&](double a) { return fig5_hazard(a, tau, h); }, g);
  for (int k = 100; k <= 800; k += 175) {
    const double a = g.face(k);
    const double exact =
        std::exp(-std::exp(h) * (a - tau * (1.0 - std::exp(-a / tau))));
    CHECK(P[k] == doctest::Approx(exact).epsilon(1e-5));
  }
}

TEST_CASE("hazard table: age range errors, time clamping") {
  AgeGrid g(1.0, 10);
  HazardTable tab{g, {}, std::vector<double>(10, 2.0)};
  CHECK(tab.at(0.0, 0.55) == 2.0);
  CHECK_THROWS_AS(tab.at(0.0, 1.5), NumericalError);

  HazardTable tt{g, {0.0, 0.1}, std::vector<double>(20, 0.0)};
  for (int i = 0; i < 10; ++i) tt.values[i] = 1.0;       // row at t = 0
  for (int i = 10; i < 20; ++i) tt.values[i] = 5.0;      // row at t = 0.1
  CHECK(tt.at(-1.0, 0.5) == 1.0);   // clamps to first row
  CHECK(tt.at(0.05, 0.5) == 1.0);   // piecewise-constant in time
  CHECK(tt.at(0.3, 0.5) == 5.0);    // clamps to last row
}
