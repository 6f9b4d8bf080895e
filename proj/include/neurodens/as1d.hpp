#pragma once

#include <functional>
#include <vector>

#include "neurodens/density.hpp"
#include "neurodens/grids.hpp"
#include "neurodens/series.hpp"

namespace neurodens {

// Hazard evaluated at (time, age). Time lookups clamp like Stimulus; age
// lookups beyond a_max are an error (no silent extrapolation in age).
using HazardFn = std::function<double(double t, double a)>;

// S(t,a) sampled on a time x age grid, or age-only when autonomous
// (times empty). Values are indexed [t_idx * n_a + a_idx].
struct HazardTable {
  AgeGrid ages;
  std::vector<double> times;   // empty => autonomous
  std::vector<double> values;

  bool autonomous() const { return times.empty(); }
  double at(double t, double a) const;
  HazardFn fn() const;
};

struct AsRunResult {
  FiringRateSeries rates;
  std::vector<DensityAge> snapshots;
};

// Age-structured transport solver. Transport along da/dt = 1 is an exact
// one-cell shift (requires da == dt); the loss term is integrated exactly
// as exp(-S dt) along the characteristic, and the fired mass re-enters the
// a = 0 cell, so discrete mass balance is exact.
class As1dSolver {
 public:
  explicit As1dSolver(AgeGrid grid) : grid_(grid) {}

  const AgeGrid& grid() const { return grid_; }

  // One step; returns the firing rate r(t). Throws NumericalError if the
  // last age cell holds more than truncation_tol of mass.
  double step(DensityAge& n, const HazardFn& S, double dt,
              double truncation_tol = 1e-8);

  AsRunResult solve(DensityAge n0, const HazardFn& S, double horizon,
                    double dt, const std::vector<double>& snapshot_times = {});

 private:
  AgeGrid grid_;
};

// P(a) = exp(-int_0^a S) on the age faces (size n_a + 1, P(0) = 1),
// cumulative trapezoid in the exponent. Autonomous hazards only.
std::vector<double> survivor_from_hazard(
    const std::function<double(double a)>& S, const AgeGrid& grid);

}  // namespace neurodens
