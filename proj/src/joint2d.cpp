#include "neurodens/joint2d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurodens/errors.hpp"

namespace neurodens {

Joint2dSolver::Joint2dSolver(Stimulus s, PotentialGrid grid, AgeGrid ages)
    : stim_(std::move(s)), grid_(grid), ages_(ages), op_(grid, stim_.sigma()) {}

double Joint2dSolver::step(DensityJoint& pi, std::vector<double>* rho,
                           std::vector<double>* hazard_row) {
  const int n_a = ages_.n_a();
  const int n_v = grid_.n_v();
  const double dt = ages_.da();  // da == dt by construction
  if (pi.n_a != n_a || pi.n_v != n_v)
    throw ConfigError("joint density size mismatch");

  {
    double last = 0.0;
    for (double v : pi.row(n_a - 1)) last += v;
    if (last * ages_.da() * grid_.dv() > 1e-8)
      throw NumericalError("age domain truncated: mass " +
                           std::to_string(last * ages_.da() * grid_.dv()) +
                           " in last age slice");
  }

  // (i) Exact age shift by one cell.
  std::copy_backward(pi.values.begin(),
                     pi.values.end() - n_v, pi.values.end());
  std::fill(pi.row(0).begin(), pi.row(0).end(), 0.0);

  // (ii) Per-slice potential step, collecting the threshold flux.
  const double mu = stim_.mu(pi.t);
  const auto vstep = op_.implicit_step(mu, dt);
  if (rho) rho->assign(n_a, 0.0);
  if (hazard_row) hazard_row->assign(n_a, 0.0);
  double r = 0.0;
  double last_good_hazard = 0.0;
  for (int k = 1; k < n_a; ++k) {
    auto row = pi.row(k);
    double m_before = 0.0;
    for (double v : row) m_before += v;
    m_before *= grid_.dv();
    vstep.apply(row);
    for (double& v : row) {
      if (v < 0.0) {
        // rounding in the tridiagonal solve can leave tiny negatives near
        // the reinjection delta; anything larger signals a real problem
        if (v < -1e-9)
          throw NumericalError("negative joint density after step");
        v = 0.0;
      }
    }
    double m_after = 0.0;
    for (double v : row) m_after += v;
    m_after *= grid_.dv();
    // Account the fired mass as the measured slice-mass difference so the
    // reinjection balances the loss exactly (up to summation rounding),
    // rather than through the threshold-flux formula.
    const double fired = m_before - m_after;
    if (rho) (*rho)[k] = fired / dt;
    r += fired;
    if (hazard_row) {
      // Empirical transition hazard S = rho/n in exponential per-step form:
      // exp(-S dt) equals the observed surviving fraction of the slice.
      if (m_after >= kHazardFloorP && m_before > 0.0) {
        // rounding (and the clamp above) can leave m_after marginally above
        // m_before in near-empty slices; the hazard is nonnegative
        (*hazard_row)[k] = std::max(0.0, std::log(m_before / m_after) / dt);
        last_good_hazard = (*hazard_row)[k];
      } else {
        (*hazard_row)[k] = last_good_hazard;
      }
    }
  }
  // (iii) Reinject the absorbed mass r dt at (a = 0, v = v_r). When nothing
  // fires, summation rounding can leave r marginally negative; floor it.
  r = std::max(0.0, r);
  deposit_delta(grid_, grid_.v_r(), r, pi.row(0));
  pi.t += dt;
  return r;
}

JointRunResult Joint2dSolver::solve(DensityJoint pi0, double horizon,
                                    const JointRunOptions& opts) {
  JointRunResult out;
  const long n_steps = std::lround(horizon / ages_.da());
  std::size_t next_snap = 0;
  auto maybe_snapshot = [&]() {
    while (next_snap < opts.snapshot_times.size() &&
           pi0.t >= opts.snapshot_times[next_snap] - 0.5 * ages_.da()) {
      out.snapshots.push_back(pi0);
      ++next_snap;
    }
  };
  maybe_snapshot();
  std::vector<double> haz_row;
  if (opts.record_hazard) {
    out.hazard.ages = ages_;
    out.hazard.times.reserve(n_steps);
    out.hazard.values.reserve(n_steps * ages_.n_a());
  }
  for (long m = 0; m < n_steps; ++m) {
    const double t_start = pi0.t;
    const double r =
        step(pi0, nullptr, opts.record_hazard ? &haz_row : nullptr);
    if (opts.record_hazard) {
      out.hazard.times.push_back(t_start);
      out.hazard.values.insert(out.hazard.values.end(), haz_row.begin(),
                               haz_row.end());
    }
    out.rates.times.push_back(pi0.t);
    out.rates.rates.push_back(r);
    maybe_snapshot();
  }
  return out;
}

std::pair<DensityJoint, double> Joint2dSolver::stationary(
    const DensityJoint& pi0, double tol, long max_steps) {
  if (!stim_.is_constant())
    throw ConfigError("stationary_joint requires a constant stimulus");
  DensityJoint pi = pi0;
  std::vector<double> prev;
  const double cell = ages_.da() * grid_.dv();
  double r = 0.0;
  for (long m = 0; m < max_steps; ++m) {
    prev = pi.values;
    r = step(pi);
    double diff = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i)
      diff += std::abs(pi.values[i] - prev[i]);
    if (diff * cell < tol) return {std::move(pi), r};
  }
  throw NumericalError("stationary_joint did not converge within step budget");
}

DensityField1D marginal_potential(const DensityJoint& pi, const AgeGrid& ga) {
  DensityField1D p;
  p.t = pi.t;
  p.values.assign(pi.n_v, 0.0);
  for (int k = 0; k < pi.n_a; ++k) {
    auto row = pi.row(k);
    for (int i = 0; i < pi.n_v; ++i) p.values[i] += row[i];
  }
  for (double& v : p.values) v *= ga.da();
  return p;
}

DensityAge marginal_age(const DensityJoint& pi, const PotentialGrid& gv) {
  DensityAge n;
  n.t = pi.t;
  n.values.assign(pi.n_a, 0.0);
  for (int k = 0; k < pi.n_a; ++k) {
    double s = 0.0;
    for (double v : pi.row(k)) s += v;
    n.values[k] = s * gv.dv();
  }
  return n;
}

DensityJoint transform_solution(
    const std::vector<std::vector<double>>& phi_slices,
    const std::vector<double>& P, const DensityAge& n,
    const PotentialGrid& grid, const AgeGrid& ages) {
  const int n_a = ages.n_a();
  const int n_v = grid.n_v();
  if (static_cast<int>(phi_slices.size()) < n_a ||
      static_cast<int>(P.size()) < n_a ||
      static_cast<int>(n.values.size()) != n_a)
    throw ConfigError("transform_solution: input sizes do not match grids");

  DensityJoint pi;
  pi.n_a = n_a;
  pi.n_v = n_v;
  pi.t = n.t;
  pi.values.assign(static_cast<std::size_t>(n_a) * n_v, 0.0);
  for (int k = 0; k < n_a; ++k) {
    const double cell_mass = n.values[k] * ages.da();
    if (P[k] < kHazardFloorP) {
      if (cell_mass > 1e-9)
        throw NumericalError(
            "transform_solution: survivor floor hit on an age cell carrying "
            "mass (inconsistent phi/n inputs)");
      continue;  // tail carries negligible mass; leave the row at zero
    }
    const double scale = n.values[k] / P[k];
    auto row = pi.row(k);
    for (int i = 0; i < n_v; ++i) row[i] = phi_slices[k][i] * scale;
  }
  return pi;
}

double joint_residual_l1(const DensityJoint& before, const DensityJoint& after,
                         const PotentialOperator& op, double mu, double dt,
                         const AgeGrid& ages, double a_cut) {
  const int n_a = after.n_a;
  const int n_v = after.n_v;
  const double da = ages.da();
  std::vector<double> Lrow(n_v);
  double norm = 0.0;
  for (int k = 1; k < n_a; ++k) {
    if (ages.center(k) < a_cut) continue;
    op.apply(mu, after.row(k), Lrow);
    auto cur = after.row(k);
    auto prevA = after.row(k - 1);
    auto prevT = before.row(k);
    for (int i = 0; i < n_v; ++i) {
      const double resid =
          (cur[i] - prevT[i]) / dt + (cur[i] - prevA[i]) / da + Lrow[i];
      norm += std::abs(resid);
    }
  }
  return norm * da * op.grid().dv();
}

}  // namespace neurodens
