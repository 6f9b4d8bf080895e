#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "neurodens/errors.hpp"
#include "neurodens/grids.hpp"

namespace neurodens {

inline constexpr double kMassTol = 1e-6;    // unit-mass accounting tolerance
inline constexpr double kHazardFloorP = 1e-10;  // survivor floor for S = ISI/P

// Densities are stored as cell averages (finite-volume convention).
struct DensityField1D {
  std::vector<double> values;  // probability per potential
  double t = 0.0;
};

struct DensityAge {
  std::vector<double> values;  // probability per age
  double t = 0.0;
};

// Row-major (age-major) joint density: values[a * n_v + v].
struct DensityJoint {
  std::vector<double> values;  // probability per potential*age
  int n_a = 0;
  int n_v = 0;
  double t = 0.0;

  double& at(int a, int v) { return values[static_cast<std::size_t>(a) * n_v + v]; }
  double at(int a, int v) const { return values[static_cast<std::size_t>(a) * n_v + v]; }
  std::span<double> row(int a) { return {values.data() + static_cast<std::size_t>(a) * n_v, static_cast<std::size_t>(n_v)}; }
  std::span<const double> row(int a) const { return {values.data() + static_cast<std::size_t>(a) * n_v, static_cast<std::size_t>(n_v)}; }
};

// Midpoint-rule integral of cell-averaged values; exact for piecewise
// constants and linear in the field.
inline double mass(std::span<const double> cells, double cell_width) {
  return std::accumulate(cells.begin(), cells.end(), 0.0) * cell_width;
}

inline double mass(const DensityField1D& p, const PotentialGrid& g) {
  if (static_cast<int>(p.values.size()) != g.n_v())
    throw ConfigError("density/grid dimension mismatch");
  return mass(p.values, g.dv());
}

inline double mass(const DensityAge& n, const AgeGrid& g) {
  if (static_cast<int>(n.values.size()) != g.n_a())
    throw ConfigError("density/grid dimension mismatch");
  return mass(n.values, g.da());
}

inline double mass(const DensityJoint& pi, const AgeGrid& ga,
                   const PotentialGrid& gv) {
  if (pi.n_a != ga.n_a() || pi.n_v != gv.n_v())
    throw ConfigError("density/grid dimension mismatch");
  return mass(pi.values, ga.da() * gv.dv());
}

// Two-cell moment-preserving deposit of a point mass: the weight is split
// between the cells bracketing `location` so that both the deposited mass
// and its first moment are exact. Falls back to the single outermost cell
// when the location lies between the domain face and the outer cell center.
inline void deposit_delta(const PotentialGrid& g, double location,
                          double weight, std::span<double> into) {
  if (!(location > g.v_min() && location < g.v_th()))
    throw ConfigError("delta location outside open potential domain");
  if (static_cast<int>(into.size()) != g.n_v())
    throw ConfigError("deposit target size mismatch");
  const double dv = g.dv();
  const double s = (location - g.v_min()) / dv - 0.5;  // center coordinate
  if (s <= 0.0) {
    into[0] += weight / dv;
    return;
  }
  if (s >= g.n_v() - 1) {
    into[g.n_v() - 1] += weight / dv;
    return;
  }
  const int i = static_cast<int>(s);
  const double f = s - i;  // fraction toward cell i+1
  into[i] += (1.0 - f) * weight / dv;
  into[i + 1] += f * weight / dv;
}

// Discretized Gaussian as cell averages via face-difference of the CDF;
// mass over the grid equals the analytic mass inside [v_min, v_th].
inline std::vector<double> gaussian_cells(double mean, double stddev,
                                          double lo, double dx, int n) {
  std::vector<double> out(n);
  auto cdf = [&](double x) {
    return 0.5 * std::erfc(-(x - mean) / (stddev * std::sqrt(2.0)));
  };
  for (int i = 0; i < n; ++i)
    out[i] = (cdf(lo + (i + 1) * dx) - cdf(lo + i * dx)) / dx;
  return out;
}

inline void normalize(std::span<double> cells, double cell_width) {
  const double m = mass(cells, cell_width);
  if (!(m > 0.0)) throw NumericalError("cannot normalize zero-mass field");
  for (double& v : cells) v /= m;
}

}  // namespace neurodens
