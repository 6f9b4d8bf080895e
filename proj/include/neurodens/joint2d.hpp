#pragma once

#include <utility>
#include <vector>

#include "neurodens/as1d.hpp"
#include "neurodens/density.hpp"
#include "neurodens/potential_op.hpp"
#include "neurodens/series.hpp"
#include "neurodens/stimulus.hpp"

namespace neurodens {

struct JointRunOptions {
  std::vector<double> snapshot_times;
  bool record_hazard = false;  // empirical S(t,a) table, row per step
};

struct JointRunResult {
  FiringRateSeries rates;
  std::vector<DensityJoint> snapshots;
  HazardTable hazard;  // populated when record_hazard is set
};

// Solver for the 2D age-potential density with reinjection at (0, v_r).
// Operator splitting per step: exact age shift, per-age-slice potential
// operator collecting the threshold flux rho(t,a), then deposit of the
// total absorbed mass r dt at (a = 0, v = v_r). Conservation is exact.
class Joint2dSolver {
 public:
  Joint2dSolver(Stimulus s, PotentialGrid grid, AgeGrid ages);

  const PotentialGrid& grid() const { return grid_; }
  const AgeGrid& ages() const { return ages_; }
  const PotentialOperator& op() const { return op_; }

  // One step; returns r(t). Optionally reports rho(t,a) per age cell and
  // the empirical transition hazard row (see empirical_hazard_row).
  double step(DensityJoint& pi, std::vector<double>* rho = nullptr,
              std::vector<double>* hazard_row = nullptr);

  JointRunResult solve(DensityJoint pi0, double horizon,
                       const JointRunOptions& opts = {});

  // Long-time integration to the stationary density; constant stimulus.
  std::pair<DensityJoint, double> stationary(const DensityJoint& pi0,
                                             double tol = 1e-9,
                                             long max_steps = 1'000'000);

 private:
  Stimulus stim_;
  PotentialGrid grid_;
  AgeGrid ages_;
  PotentialOperator op_;
};

// Potential marginal p(t,v) = int pi da (age-quadrature per potential cell).
DensityField1D marginal_potential(const DensityJoint& pi, const AgeGrid& ga);

// Age marginal n(t,a) = int pi dv (potential-quadrature per age cell).
DensityAge marginal_age(const DensityJoint& pi, const PotentialGrid& gv);

// Transform construction pi(t,a,v) = phi(t,a,v) n(t,a) / P(t,a).
// phi_slices[k] and P[k] follow the first-passage solver's
// age-face indexing; n is the age density evolved under the matching
// hazard. Throws if the survivor floor is hit on a cell carrying mass.
DensityJoint transform_solution(const std::vector<std::vector<double>>& phi_slices,
                                const std::vector<double>& P,
                                const DensityAge& n,
                                const PotentialGrid& grid,
                                const AgeGrid& ages);

// L1 norm of the unsplit discrete-operator residual
//   (pi' - pi)/dt + upwind d/da pi' + L_v pi'
// over age cells with center >= a_cut (masking the singular reinjection
// region). `before`/`after` are consecutive states of a discrete solution.
double joint_residual_l1(const DensityJoint& before, const DensityJoint& after,
                         const PotentialOperator& op, double mu, double dt,
                         const AgeGrid& ages, double a_cut);

}  // namespace neurodens
