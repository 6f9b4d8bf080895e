#include "neurodens/fp1d.hpp"

#include <cmath>
#include <string>

#include "neurodens/errors.hpp"

namespace neurodens {

namespace {

// Implicit Chang-Cooper updates stay nonnegative in exact arithmetic;
// anything below -1e-12 signals a genuine configuration problem.
void enforce_nonnegative(std::vector<double>& values) {
  for (double& v : values) {
    if (v < 0.0) {
      if (v < -1e-12)
        throw NumericalError("negative density after step: " +
                             std::to_string(v));
      v = 0.0;
    }
  }
}

}  // namespace

Fp1dSolver::Fp1dSolver(PotentialGrid grid, double sigma)
    : op_(grid, sigma) {}

const PotentialOperator::ImplicitStep& Fp1dSolver::cached_step(double mu,
                                                               double dt) {
  if (!cache_ || cache_->mu() != mu || cache_->dt() != dt)
    cache_.emplace(op_, mu, dt);
  return *cache_;
}

double Fp1dSolver::step(DensityField1D& p, const Stimulus& s, double dt) {
  const double mu = s.mu(p.t);
  const double r = cached_step(mu, dt).apply(p.values);
  deposit_delta(op_.grid(), op_.grid().v_r(), r * dt, p.values);
  enforce_nonnegative(p.values);
  p.t += dt;
  return r;
}

FpRunResult Fp1dSolver::solve(DensityField1D p0, const Stimulus& s,
                              double horizon, double dt,
                              const std::vector<double>& snapshot_times) {
  FpRunResult out;
  const long n_steps = std::lround(horizon / dt);
  std::size_t next_snap = 0;
  auto maybe_snapshot = [&]() {
    while (next_snap < snapshot_times.size() &&
           p0.t >= snapshot_times[next_snap] - 0.5 * dt) {
      out.snapshots.push_back(p0);
      ++next_snap;
    }
  };
  maybe_snapshot();
  for (long k = 0; k < n_steps; ++k) {
    const double r = step(p0, s, dt);
    out.rates.times.push_back(p0.t);
    out.rates.rates.push_back(r);
    maybe_snapshot();
  }
  return out;
}

std::pair<DensityField1D, double> Fp1dSolver::stationary(const Stimulus& s,
                                                         double dt, double tol,
                                                         long max_steps) {
  if (!s.is_constant())
    throw ConfigError("stationary_fp requires a constant stimulus");
  const PotentialGrid& g = op_.grid();
  DensityField1D p;
  p.values = gaussian_cells(g.v_r(), 0.25 * (g.v_th() - g.v_min()), g.v_min(),
                            g.dv(), g.n_v());
  normalize(p.values, g.dv());

  std::vector<double> prev;
  double r = 0.0;
  for (long k = 0; k < max_steps; ++k) {
    prev = p.values;
    r = step(p, s, dt);
    double diff = 0.0;
    for (int i = 0; i < g.n_v(); ++i)
      diff += std::abs(p.values[i] - prev[i]) * g.dv();
    if (diff < tol) return {std::move(p), r};
  }
  throw NumericalError("stationary_fp did not converge within step budget");
}

}  // namespace neurodens
