#include "neurodens/potential_op.hpp"

#include <cmath>

#include "neurodens/errors.hpp"

namespace neurodens {

namespace {

// Chang-Cooper weight delta(w) = 1/(1 - e^{-w}) - 1/w, the donor-cell
// fraction that makes the zero-flux discrete state match exp(w) ratios
// between neighboring cells. delta -> 1/2 as w -> 0, -> {1, 0} for
// w -> +-inf.
double cc_weight(double w) {
  if (std::abs(w) < 1e-6) return 0.5 + w / 12.0;
  return -1.0 / std::expm1(-w) - 1.0 / w;
}

}  // namespace

PotentialOperator::PotentialOperator(PotentialGrid grid, double sigma)
    : grid_(grid), sigma_(sigma) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
}

void PotentialOperator::face_coeffs(double mu, std::vector<double>& aL,
                                    std::vector<double>& aR) const {
  const int n = grid_.n_v();
  const double h = grid_.dv();
  const double D = 0.5 * sigma_ * sigma_;
  aL.assign(n + 1, 0.0);
  aR.assign(n + 1, 0.0);
  for (int j = 1; j < n; ++j) {
    const double B = mu - grid_.face(j);
    const double w = B * h / D;
    const double d = cc_weight(w);
    aL[j] = B * d + D / h;
    aR[j] = B * (1.0 - d) - D / h;
  }
  // Face 0 (reflecting): zero total flux. Face n (threshold): ghost zero;
  // one-sided diffusive outflow only.
  aL[n] = 2.0 * D / h;
  aR[n] = 0.0;
}

double PotentialOperator::threshold_flux(std::span<const double> p) const {
  const double h = grid_.dv();
  return sigma_ * sigma_ * p[grid_.n_v() - 1] / h;
}

double PotentialOperator::apply(double mu, std::span<const double> p,
                                std::span<double> out) const {
  const int n = grid_.n_v();
  if (static_cast<int>(p.size()) != n || static_cast<int>(out.size()) != n)
    throw ConfigError("operator size mismatch");
  std::vector<double> aL, aR;
  face_coeffs(mu, aL, aR);
  const double h = grid_.dv();
  std::vector<double> F(n + 1, 0.0);
  for (int j = 1; j < n; ++j) F[j] = aL[j] * p[j - 1] + aR[j] * p[j];
  F[n] = aL[n] * p[n - 1];
  for (int i = 0; i < n; ++i) out[i] = (F[i + 1] - F[i]) / h;
  return F[n];
}

PotentialOperator::ImplicitStep::ImplicitStep(const PotentialOperator& op,
                                              double mu, double dt)
    : n_(op.grid_.n_v()), mu_(mu), dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  const double h = op.grid_.dv();
  flux_coef_ = op.sigma_ * op.sigma_ / h;

  std::vector<double> aL, aR;
  op.face_coeffs(mu, aL, aR);

  // Rows of (I + dt L): lower_i p_{i-1} + diag_i p_i + upper_i p_{i+1}.
  std::vector<double> diag(n_, 1.0), upper(n_, 0.0);
  lower_.assign(n_, 0.0);
  const double c = dt / h;
  for (int i = 0; i < n_; ++i) {
    diag[i] += c * (aL[i + 1] - aR[i]);
    if (i + 1 < n_) upper[i] += c * aR[i + 1];
    if (i > 0) lower_[i] -= c * aL[i];
  }
  diag[n_ - 1] += 0.0;  // threshold outflow already in aL[n]

  // Thomas factorization.
  cprime_.assign(n_, 0.0);
  inv_denom_.assign(n_, 0.0);
  inv_denom_[0] = 1.0 / diag[0];
  cprime_[0] = upper[0] * inv_denom_[0];
  for (int i = 1; i < n_; ++i) {
    const double denom = diag[i] - lower_[i] * cprime_[i - 1];
    inv_denom_[i] = 1.0 / denom;
    cprime_[i] = upper[i] * inv_denom_[i];
  }
  work_.assign(n_, 0.0);
}

double PotentialOperator::ImplicitStep::apply(std::span<double> p) const {
  if (static_cast<int>(p.size()) != n_)
    throw ConfigError("implicit step size mismatch");
  std::vector<double>& d = work_;
  d[0] = p[0] * inv_denom_[0];
  for (int i = 1; i < n_; ++i)
    d[i] = (p[i] - lower_[i] * d[i - 1]) * inv_denom_[i];
  p[n_ - 1] = d[n_ - 1];
  for (int i = n_ - 2; i >= 0; --i) p[i] = d[i] - cprime_[i] * p[i + 1];
  return flux_coef_ * p[n_ - 1];
}

}  // namespace neurodens
