#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "neurodens/density.hpp"
#include "neurodens/potential_op.hpp"
#include "neurodens/series.hpp"
#include "neurodens/stimulus.hpp"

namespace neurodens {

struct FpRunResult {
  FiringRateSeries rates;
  std::vector<DensityField1D> snapshots;
};

// 1D Fokker-Planck solver with absorbing threshold, reflecting lower
// boundary and reinjection of the absorbed flux at v_r. Mass is conserved
// exactly per step: the reinjected weight is the absorbed flux of the
// implicit update itself.
class Fp1dSolver {
 public:
  Fp1dSolver(PotentialGrid grid, double sigma);

  const PotentialGrid& grid() const { return op_.grid(); }
  const PotentialOperator& op() const { return op_; }

  // One backward-Euler step with reinjection; returns the firing rate r(t).
  double step(DensityField1D& p, const Stimulus& s, double dt);

  FpRunResult solve(DensityField1D p0, const Stimulus& s, double horizon,
                    double dt, const std::vector<double>& snapshot_times = {});

  // Long-time integration of a constant stimulus until the per-step L1
  // change falls below tol. Returns the stationary density and rate.
  std::pair<DensityField1D, double> stationary(const Stimulus& s, double dt,
                                               double tol = 1e-9,
                                               long max_steps = 10'000'000);

 private:
  const PotentialOperator::ImplicitStep& cached_step(double mu, double dt);

  PotentialOperator op_;
  std::optional<PotentialOperator::ImplicitStep> cache_;
};

}  // namespace neurodens
