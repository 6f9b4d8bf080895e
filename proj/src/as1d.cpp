#include "neurodens/as1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurodens/errors.hpp"

namespace neurodens {

double HazardTable::at(double t, double a) const {
  if (!(a >= 0.0) || a >= ages.a_max())
    throw NumericalError("hazard table age range exceeded: a = " +
                         std::to_string(a));
  const int ai = std::min(static_cast<int>(a / ages.da()), ages.n_a() - 1);
  if (autonomous()) return values[ai];
  // Piecewise-constant in time, clamped at the ends (nearest sample).
  std::size_t ti;
  if (t <= times.front()) {
    ti = 0;
  } else if (t >= times.back()) {
    ti = times.size() - 1;
  } else {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    ti = static_cast<std::size_t>(it - times.begin()) - 1;
  }
  return values[ti * ages.n_a() + ai];
}

HazardFn HazardTable::fn() const {
  return [this](double t, double a) { return at(t, a); };
}

double As1dSolver::step(DensityAge& n, const HazardFn& S, double dt,
                        double truncation_tol) {
  const int n_a = grid_.n_a();
  const double da = grid_.da();
  if (std::abs(da - dt) > 1e-12 * std::max(da, dt))
    throw ConfigError("as1d requires da == dt (exact-shift transport)");
  if (static_cast<int>(n.values.size()) != n_a)
    throw ConfigError("age density size mismatch");
  if (n.values.back() * da > truncation_tol)
    throw NumericalError("age domain truncated: mass " +
                         std::to_string(n.values.back() * da) +
                         " in last age cell");

  // Exact shift by one cell; the (checked) last cell falls off.
  std::rotate(n.values.rbegin(), n.values.rbegin() + 1, n.values.rend());
  n.values[0] = 0.0;

  const double t = n.t;
  double fired = 0.0;
  for (int k = 1; k < n_a; ++k) {
    if (n.values[k] == 0.0) continue;
    const double s = S(t, grid_.center(k));
    if (s < 0.0) throw NumericalError("negative hazard encountered");
    const double keep = std::exp(-s * dt);
    fired += n.values[k] * (1.0 - keep) * da;
    n.values[k] *= keep;
  }
  const double r = fired / dt;
  n.values[0] += r;  // n(t,0) = r(t), nonlocal reset boundary
  n.t += dt;
  return r;
}

AsRunResult As1dSolver::solve(DensityAge n0, const HazardFn& S, double horizon,
                              double dt,
                              const std::vector<double>& snapshot_times) {
  AsRunResult out;
  const long n_steps = std::lround(horizon / dt);
  std::size_t next_snap = 0;
  auto maybe_snapshot = [&]() {
    while (next_snap < snapshot_times.size() &&
           n0.t >= snapshot_times[next_snap] - 0.5 * dt) {
      out.snapshots.push_back(n0);
      ++next_snap;
    }
  };
  maybe_snapshot();
  for (long k = 0; k < n_steps; ++k) {
    const double r = step(n0, S, dt);
    out.rates.times.push_back(n0.t);
    out.rates.rates.push_back(r);
    maybe_snapshot();
  }
  return out;
}

std::vector<double> survivor_from_hazard(
    const std::function<double(double a)>& S, const AgeGrid& grid) {
  const int n_a = grid.n_a();
  const double da = grid.da();
  std::vector<double> P(n_a + 1);
  P[0] = 1.0;
  double cum = 0.0;
  double s_prev = S(0.0);
  for (int k = 1; k <= n_a; ++k) {
    const double s = S(grid.face(k));
    cum += 0.5 * (s_prev + s) * da;
    s_prev = s;
    P[k] = std::exp(-cum);
  }
  return P;
}

}  // namespace neurodens
