#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neurodens/as1d.hpp"
#include "neurodens/fp1d.hpp"
#include "neurodens/fpt.hpp"
#include "neurodens/joint2d.hpp"

using namespace neurodens;

namespace {

// Smooth product density: Gaussian in age times Gaussian in potential,
// normalized to unit mass on the grids.
DensityJoint product_gaussian(const AgeGrid& ga, const PotentialGrid& gv,
                              double a_mean, double a_sd, double v_mean,
                              double v_sd) {
  auto na = gaussian_cells(a_mean, a_sd, 0.0, ga.da(), ga.n_a());
  auto pv = gaussian_cells(v_mean, v_sd, gv.v_min(), gv.dv(), gv.n_v());
  DensityJoint pi;
  pi.n_a = ga.n_a();
  pi.n_v = gv.n_v();
  pi.values.resize((std::size_t)pi.n_a * pi.n_v);
  for (int k = 0; k < pi.n_a; ++k)
    for (int i = 0; i < pi.n_v; ++i) pi.at(k, i) = na[k] * pv[i];
  normalize(pi.values, ga.da() * gv.dv());
  return pi;
}

double l1(std::span<const double> a, std::span<const double> b, double cell) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * cell;
}

}  // namespace

TEST_CASE("joint2d: mass conserved exactly per step, density nonnegative") {
  PotentialGrid gv(-2.0, 0.5, 1.0, 100);
  AgeGrid ga(1.0, 1000);
  auto stim = Stimulus::waveform({{0.0, 3.0}, {0.1, 3.3}, {0.3, 2.9}}, 0.2);
  Joint2dSolver solver(stim, gv, ga);
  // tight initial tails: nothing may reach the age boundary, or the silent
  // sub-tolerance truncation there shows up as mass drift
  auto pi = product_gaussian(ga, gv, 0.1, 0.02, 0.4, 0.05);
  const double m0 = mass(pi, ga, gv);
  for (int m = 0; m < 200; ++m) {
    const double r = solver.step(pi);
    CHECK(r >= 0.0);
  }
  CHECK(std::abs(mass(pi, ga, gv) - m0) < 1e-12);
  for (double v : pi.values) CHECK(v >= 0.0);
}

TEST_CASE("joint2d: boundary slice carries exactly the reinjected mass r dt") {
  PotentialGrid gv(-2.0, 0.5, 1.0, 100);
  AgeGrid ga(0.6, 600);
  Joint2dSolver solver(Stimulus::constant(3.0, 0.2), gv, ga);
  auto pi = product_gaussian(ga, gv, 0.15, 0.04, 0.3, 0.15);
  for (int m = 0; m < 50; ++m) {
    const double r = solver.step(pi);
    const double row0 = mass(pi.row(0), gv.dv()) * ga.da();
    CHECK(row0 == doctest::Approx(r * ga.da()).epsilon(1e-12));
  }
}

TEST_CASE("joint2d: potential marginal evolves exactly like the 1D solver") {
  PotentialGrid gv(-2.0, 0.5, 1.0, 120);
  AgeGrid ga(1.0, 1000);
  const double dt = ga.da();
  auto stim = Stimulus::waveform({{0.0, 3.0}, {0.15, 3.4}, {0.3, 2.8}}, 0.2);
  Joint2dSolver solver(stim, gv, ga);
  Fp1dSolver fp(gv, 0.2);

  auto pi = product_gaussian(ga, gv, 0.15, 0.04, 0.3, 0.15);
  DensityField1D p = marginal_potential(pi, ga);
  for (int m = 0; m < 300; ++m) {
    const double r2 = solver.step(pi);
    const double r1 = fp.step(p, stim, dt);
    CHECK(std::abs(r2 - r1) < 1e-9);
  }
  auto marg = marginal_potential(pi, ga);
  CHECK(l1(marg.values, p.values, gv.dv()) < 1e-9);
}

TEST_CASE("joint2d: age marginal evolves exactly like the age-structured solver under the empirical hazard") {
  PotentialGrid gv(-2.0, 0.5, 1.0, 100);
  AgeGrid ga(1.0, 1000);
  const double dt = ga.da();
  auto stim = Stimulus::waveform({{0.0, 3.0}, {0.15, 3.4}, {0.3, 2.8}}, 0.2);
  Joint2dSolver solver(stim, gv, ga);
  auto pi = product_gaussian(ga, gv, 0.15, 0.04, 0.3, 0.15);
  DensityAge n0 = marginal_age(pi, gv);

  JointRunOptions opts;
  opts.record_hazard = true;
  auto run = solver.solve(pi, 0.3, opts);

  As1dSolver as(ga);
  auto S = run.hazard.fn();
  DensityAge n = n0;
  for (std::size_t m = 0; m < run.rates.times.size(); ++m) {
    const double r = as.step(n, S, dt);
    CHECK(std::abs(r - run.rates.rates[m]) < 1e-8);
  }
  // re-evolve the joint density to recover its final age marginal
  DensityJoint pif = pi;
  for (std::size_t m = 0; m < run.rates.times.size(); ++m) solver.step(pif);
  auto nf = marginal_age(pif, gv);
  CHECK(l1(nf.values, n.values, ga.da()) < 1e-9);
}

TEST_CASE("joint2d stationary: factorizes as rate times first-passage density") {
  PotentialGrid gv(-2.0, 0.5, 1.0, 200);
  AgeGrid ga(0.8, 800);
  const double mu = 3.0, sigma = 0.15;
  Joint2dSolver solver(Stimulus::constant(mu, sigma), gv, ga);
  auto pi0 = product_gaussian(ga, gv, 0.1, 0.03, 0.4, 0.1);
  auto [pist, rbar] = solver.stationary(pi0, 1e-8);
  CHECK(rbar > 0.0);
  // the initial transient leaks O(1e-8) of mass through the age boundary
  CHECK(std::abs(mass(pist, ga, gv) - 1.0) < 1e-6);

  auto fptsol = solve_fpt_autonomous(mu, sigma, gv, ga, true, 0);
  // pi_bar(a, v) = rbar * phi(a, v), n_bar(a) = rbar * P(a)
  double diff = 0.0;
  for (int k = 0; k < ga.n_a(); ++k)
    for (int i = 0; i < gv.n_v(); ++i)
      diff += std::abs(pist.at(k, i) - rbar * fptsol.phi[k].values[i]);
  CHECK(diff * ga.da() * gv.dv() < 1e-3);

  auto nbar = marginal_age(pist, gv);
  for (int k = 0; k < ga.n_a(); ++k)
    CHECK(std::abs(nbar.values[k] - rbar * fptsol.survivor[k]) <
          1e-3 * std::max(1.0, rbar));

  // potential marginal agrees with the 1D stationary state
  Fp1dSolver fp(gv, sigma);
  auto [pst, r1] = fp.stationary(Stimulus::constant(mu, sigma), ga.da(), 1e-8);
  CHECK(rbar == doctest::Approx(r1).epsilon(1e-3));
  auto marg = marginal_potential(pist, ga);
  CHECK(l1(marg.values, pst.values, gv.dv()) < 1e-3);
}

TEST_CASE("joint2d: transform construction propagates under the joint dynamics") {
  PotentialGrid gv(-2.0, 0.5, 1.0, 120);
  AgeGrid ga(0.8, 800);
  const double mu = 3.0, sigma = 0.2;
  const double dt = ga.da();
  auto fptsol = solve_fpt_autonomous(mu, sigma, gv, ga, true, 0);

  std::vector<std::vector<double>> phi(ga.n_a());
  for (int k = 0; k < ga.n_a(); ++k) phi[k] = fptsol.phi[k].values;

  DensityAge n;
  n.values = gaussian_cells(0.2, 0.05, 0.0, ga.da(), ga.n_a());
  normalize(n.values, ga.da());
  // restrict to ages where the survivor is healthy (tail is ~0 anyway)
  for (int k = 0; k < ga.n_a(); ++k)
    if (fptsol.survivor[k] < kHazardFloorP) n.values[k] = 0.0;
  normalize(n.values, ga.da());

  auto pi = transform_solution(phi, fptsol.survivor, n, gv, ga);
  CHECK(std::abs(mass(pi, ga, gv) - 1.0) < 1e-9);

  Joint2dSolver solver(Stimulus::constant(mu, sigma), gv, ga);
  As1dSolver as(ga);
  auto S = fptsol.hazard.fn();
  for (int m = 0; m < 300; ++m) {
    const double r2 = solver.step(pi);
    const double r1 = as.step(n, S, dt);
    CHECK(std::abs(r2 - r1) < 1e-8);
  }
  auto ref = transform_solution(phi, fptsol.survivor, n, gv, ga);
  double diff = 0.0;
  for (std::size_t i = 0; i < pi.values.size(); ++i)
    diff += std::abs(pi.values[i] - ref.values[i]);
  CHECK(diff * ga.da() * gv.dv() < 1e-9);
}

TEST_CASE("joint2d: marginals integrate to the same total mass") {
  PotentialGrid gv(-2.0, 0.5, 1.0, 80);
  AgeGrid ga(0.5, 500);
  auto pi = product_gaussian(ga, gv, 0.12, 0.03, 0.3, 0.15);
  Joint2dSolver solver(Stimulus::constant(3.0, 0.2), gv, ga);
  for (int m = 0; m < 100; ++m) solver.step(pi);
  const double mj = mass(pi, ga, gv);
  CHECK(mass(marginal_potential(pi, ga), gv) == doctest::Approx(mj).epsilon(1e-12));
  CHECK(mass(marginal_age(pi, gv), ga) == doctest::Approx(mj).epsilon(1e-12));
}

TEST_CASE("joint2d: unsplit residual shrinks under simultaneous dt, dv refinement") {
  const double mu = 3.0, sigma = 0.2;
  auto residual_at = [&](double dt, int n_v) {
    PotentialGrid gv(-2.0, 0.5, 1.0, n_v);
    AgeGrid ga(1.0, (int)std::lround(1.0 / dt));
    Joint2dSolver solver(Stimulus::constant(mu, sigma), gv, ga);
    auto pi = product_gaussian(ga, gv, 0.15, 0.04, 0.3, 0.15);
    const long steps = std::lround(0.25 / dt);
    for (long m = 0; m < steps; ++m) solver.step(pi);
    DensityJoint before = pi;
    solver.step(pi);
    return joint_residual_l1(before, pi, solver.op(), mu, dt, ga, 0.05);
  };
  const double r_coarse = residual_at(2e-3, 100);
  const double r_fine = residual_at(1e-3, 200);
  CHECK(r_fine > 0.0);
  CHECK(r_coarse / r_fine >= 1.8);
}

TEST_CASE("joint2d: truncation and size mismatch are errors") {
  PotentialGrid gv(-2.0, 0.5, 1.0, 50);
  AgeGrid ga(0.2, 200);
  Joint2dSolver solver(Stimulus::constant(3.0, 0.2), gv, ga);
  // all mass at the last age slice: the domain is too short
  DensityJoint pi;
  pi.n_a = ga.n_a();
  pi.n_v = gv.n_v();
  pi.values.assign((std::size_t)pi.n_a * pi.n_v, 0.0);
  deposit_delta(gv, 0.0, 1.0 / ga.da(), pi.row(ga.n_a() - 1));
  CHECK_THROWS_AS(solver.step(pi), NumericalError);

  DensityJoint bad;
  bad.n_a = 3;
  bad.n_v = gv.n_v();
  bad.values.assign((std::size_t)3 * gv.n_v(), 0.0);
  CHECK_THROWS_AS(solver.step(bad), ConfigError);
}

TEST_CASE("joint2d transform: survivor floor with mass is an error") {
  PotentialGrid gv(-2.0, 0.5, 1.0, 4);
  AgeGrid ga(2.0, 2);
  std::vector<std::vector<double>> phi = {std::vector<double>(4, 0.25),
                                          std::vector<double>(4, 0.25)};
  std::vector<double> P = {1.0, 1e-12};
  DensityAge n;
  n.values = {0.3, 0.2};
  CHECK_THROWS_AS(transform_solution(phi, P, n, gv, ga), NumericalError);
}
