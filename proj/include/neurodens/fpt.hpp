#pragma once

#include <memory>
#include <vector>

#include "neurodens/as1d.hpp"
#include "neurodens/density.hpp"
#include "neurodens/potential_op.hpp"
#include "neurodens/series.hpp"
#include "neurodens/stimulus.hpp"

namespace neurodens {

// First-passage-time solution for a constant stimulus: the no-reinjection
// Fokker-Planck evolution of a delta at v_r.
//
// Indexing convention shared with the joint solver: phi[k] is the density
// after k implicit steps (age k * da), survivor[k] = mass(phi[k]) with
// survivor[0] = 1, and isi[k] / hazard cell k cover the age interval
// (k da, (k+1) da).
struct FptSolution {
  PotentialGrid grid;
  AgeGrid ages;
  std::vector<double> isi;       // per age cell, threshold flux
  std::vector<double> survivor;  // per age face, size n_a + 1
  HazardTable hazard;            // autonomous, per age cell
  std::vector<DensityField1D> phi;  // kept when requested

  double isi_mass() const;   // int ISI(a) da
  double mean_isi() const;   // normalized first moment of ISI
};

// The first `polluted_cells` ISI entries are grid artifacts of the delta
// initial condition and are reported as zero.
FptSolution solve_fpt_autonomous(double mu, double sigma,
                                 const PotentialGrid& grid,
                                 const AgeGrid& ages, bool keep_phi = true,
                                 int polluted_cells = 2);

// Non-autonomous first-passage solver: evolves phi(t,a,v) with an exact age
// shift plus the per-slice potential operator, refilling the a = 0 slice
// with a fresh delta at v_r each step. Accumulates P(t,a), ISI(t,a) and the
// hazard S(t,a) tables row per step; row m covers [t_m, t_m + dt).
class FptNonAutonomousSolver {
 public:
  FptNonAutonomousSolver(Stimulus s, PotentialGrid grid, AgeGrid ages);

  double t() const { return t_; }
  double dt() const { return ages_.da(); }
  const AgeGrid& ages() const { return ages_; }
  const PotentialGrid& grid() const { return grid_; }

  void step();
  void run(double horizon);

  // Current slice at age index k (age k * da at time t()).
  const std::vector<double>& slice(int k) const;
  // Current survivor values P(t(), k * da), size n_a, P[0] = 1.
  const std::vector<double>& survivor() const { return P_; }

  // Accumulated tables. ISI/hazard row m covers the step [times[m],
  // times[m] + dt); survivor_rows()[m] is P at time m * dt (one more row
  // than steps taken, the first being the t = 0 state).
  const std::vector<double>& times() const { return row_times_; }
  const std::vector<std::vector<double>>& survivor_rows() const { return P_rows_; }
  const std::vector<std::vector<double>>& isi_rows() const { return isi_rows_; }
  HazardTable hazard_table() const;

 private:
  Stimulus stim_;
  PotentialGrid grid_;
  AgeGrid ages_;
  PotentialOperator op_;
  double t_ = 0.0;
  int head_ = 0;  // ring index of age slice 0
  std::vector<std::vector<double>> slices_;
  std::vector<double> P_;
  std::vector<double> row_times_;
  std::vector<std::vector<double>> P_rows_;
  std::vector<std::vector<double>> isi_rows_;
  std::vector<std::vector<double>> hazard_rows_;
};

}  // namespace neurodens
