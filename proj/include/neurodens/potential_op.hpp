#pragma once

#include <span>
#include <vector>

#include "neurodens/grids.hpp"

namespace neurodens {

// Conservative finite-volume discretization of the potential operator
//   L p = d/dv[(mu - v) p] - (sigma^2/2) d^2p/dv^2
// with Chang-Cooper flux weighting, zero total flux at the lower face and
// an absorbing threshold (ghost value 0 at the upper face). The absorbed
// one-sided diffusive flux at the threshold is the discrete firing rate.
class PotentialOperator {
 public:
  PotentialOperator(PotentialGrid grid, double sigma);

  const PotentialGrid& grid() const { return grid_; }
  double sigma() const { return sigma_; }

  // Explicit application: out_i = (L p)_i so that dp/dt = -(L p) loses mass
  // only through the threshold face. Returns the threshold flux of p.
  double apply(double mu, std::span<const double> p,
               std::span<double> out) const;

  // Diffusive flux through the threshold face, -(sigma^2/2) dp/dv with a
  // ghost zero at the face.
  double threshold_flux(std::span<const double> p) const;

  // Factorized backward-Euler step (I + dt L) p' = p for fixed (mu, dt).
  // The M-matrix structure keeps p' nonnegative; summing rows shows the
  // update conserves mass up to exactly dt * threshold_flux(p').
  class ImplicitStep {
   public:
    ImplicitStep(const PotentialOperator& op, double mu, double dt);

    // Solves in place and returns the threshold flux of the updated field.
    double apply(std::span<double> p) const;

    double mu() const { return mu_; }
    double dt() const { return dt_; }

   private:
    int n_;
    double mu_, dt_, flux_coef_;
    std::vector<double> lower_, cprime_, inv_denom_;
    mutable std::vector<double> work_;
  };

  ImplicitStep implicit_step(double mu, double dt) const {
    return ImplicitStep(*this, mu, dt);
  }

 private:
  // Face coefficients of the Chang-Cooper flux F_j = aL_j p_{j-1} + aR_j p_j
  // at interior face j (between cells j-1 and j).
  void face_coeffs(double mu, std::vector<double>& aL,
                   std::vector<double>& aR) const;

  PotentialGrid grid_;
  double sigma_;

  friend class ImplicitStep;
};

}  // namespace neurodens
