#pragma once

#include "neurodens/errors.hpp"

namespace neurodens {

// Uniform cell-centered grid in membrane potential. v_th is the upper face
// of the last cell (the absorbing threshold); v_min truncates the ideal
// v -> -infinity domain and carries the reflecting condition.
class PotentialGrid {
 public:
  PotentialGrid(double v_min, double v_r, double v_th, int n_v)
      : v_min_(v_min), v_th_(v_th), v_r_(v_r), n_v_(n_v) {
    if (n_v < 2) throw ConfigError("potential grid needs at least 2 cells");
    if (!(v_min < v_r && v_r < v_th))
      throw ConfigError("require v_min < v_r < v_th");
    dv_ = (v_th - v_min) / n_v;
  }

  double v_min() const { return v_min_; }
  double v_th() const { return v_th_; }
  double v_r() const { return v_r_; }
  int n_v() const { return n_v_; }
  double dv() const { return dv_; }
  double center(int i) const { return v_min_ + (i + 0.5) * dv_; }
  double face(int i) const { return v_min_ + i * dv_; }

 private:
  double v_min_, v_th_, v_r_;
  int n_v_;
  double dv_;
};

// Uniform cell-centered age grid on [0, a_max]. The solvers require
// da == dt so that unit-speed age transport is an exact cell shift.
class AgeGrid {
 public:
  AgeGrid() : AgeGrid(1.0, 1) {}  // placeholder for empty tables
  AgeGrid(double a_max, int n_a) : a_max_(a_max), n_a_(n_a) {
    if (n_a < 1) throw ConfigError("age grid needs at least 1 cell");
    if (!(a_max > 0.0)) throw ConfigError("a_max must be > 0");
    da_ = a_max / n_a;
  }

  double a_max() const { return a_max_; }
  int n_a() const { return n_a_; }
  double da() const { return da_; }
  double center(int k) const { return (k + 0.5) * da_; }
  double face(int k) const { return k * da_; }

 private:
  double a_max_;
  int n_a_;
  double da_;
};

}  // namespace neurodens
