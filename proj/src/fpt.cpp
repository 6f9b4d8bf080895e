#include "neurodens/fpt.hpp"

#include <cmath>
#include <string>

#include "neurodens/errors.hpp"

namespace neurodens {

namespace {

// Hazard table entry k holds the rate of the discrete transition from age
// face k-1 to face k, S = ln(P[k-1]/P[k]) / dt, so that exp(-S dt) is
// exactly the per-step survival fraction observed in the solve. Entry 0 is
// unused (a freshly reset cohort cannot fire within its deposit step).
std::vector<double> transition_hazard(const std::vector<double>& P,
                                      double dt) {
  const std::size_t n_a = P.size() - 1;
  std::vector<double> S(n_a, 0.0);
  double last_good = 0.0;
  for (std::size_t k = 1; k < n_a; ++k) {
    if (P[k] >= kHazardFloorP && P[k - 1] > 0.0) {
      S[k] = std::log(P[k - 1] / P[k]) / dt;
      last_good = S[k];
    } else {
      // Survivor underflow: clamp to the last reliable age (the clamped
      // tail carries < kHazardFloorP probability mass).
      S[k] = last_good;
    }
  }
  return S;
}

}  // namespace

double FptSolution::isi_mass() const {
  double m = 0.0;
  for (double v : isi) m += v * ages.da();
  return m;
}

double FptSolution::mean_isi() const {
  double m = 0.0, m1 = 0.0;
  for (int k = 0; k < ages.n_a(); ++k) {
    m += isi[k] * ages.da();
    m1 += isi[k] * ages.center(k) * ages.da();
  }
  if (!(m > 0.0)) throw NumericalError("ISI density has zero mass");
  return m1 / m;
}

FptSolution solve_fpt_autonomous(double mu, double sigma,
                                 const PotentialGrid& grid,
                                 const AgeGrid& ages, bool keep_phi,
                                 int polluted_cells) {
  const int n_a = ages.n_a();
  const double dt = ages.da();
  PotentialOperator op(grid, sigma);
  const auto vstep = op.implicit_step(mu, dt);

  std::vector<double> phi(grid.n_v(), 0.0);
  deposit_delta(grid, grid.v_r(), 1.0, phi);

  FptSolution out{grid, ages, {}, {}, HazardTable{ages, {}, {}}, {}};
  out.isi.assign(n_a, 0.0);
  out.survivor.assign(n_a + 1, 0.0);
  out.survivor[0] = 1.0;
  if (keep_phi) out.phi.reserve(n_a);

  for (int k = 0; k < n_a; ++k) {
    if (keep_phi) out.phi.push_back({phi, ages.face(k)});
    const double flux = vstep.apply(phi);
    out.isi[k] = flux;
    out.survivor[k + 1] = out.survivor[k] - flux * dt;
  }

  const double deficit =
      1.0 - (out.isi_mass() + out.survivor[n_a]);
  if (std::abs(deficit) > kMassTol)
    throw NumericalError("first-passage accounting deficit " +
                         std::to_string(deficit) + " (grid too coarse)");

  out.hazard.ages = ages;
  out.hazard.values = transition_hazard(out.survivor, dt);
  for (int k = 0; k < polluted_cells && k < n_a; ++k) out.isi[k] = 0.0;
  return out;
}

FptNonAutonomousSolver::FptNonAutonomousSolver(Stimulus s, PotentialGrid grid,
                                               AgeGrid ages)
    : stim_(std::move(s)), grid_(grid), ages_(ages), op_(grid, stim_.sigma()) {
  // phi(0,a,v) is the autonomous first-passage solution at mu(0).
  FptSolution auto0 = solve_fpt_autonomous(stim_.mu(0.0), stim_.sigma(),
                                           grid_, ages_, /*keep_phi=*/true,
                                           /*polluted_cells=*/0);
  slices_.resize(ages_.n_a());
  P_.assign(ages_.n_a(), 0.0);
  for (int k = 0; k < ages_.n_a(); ++k) {
    slices_[k] = std::move(auto0.phi[k].values);
    P_[k] = auto0.survivor[k];
  }
  P_rows_.push_back(P_);
}

const std::vector<double>& FptNonAutonomousSolver::slice(int k) const {
  return slices_[(head_ + k) % ages_.n_a()];
}

void FptNonAutonomousSolver::step() {
  const int n_a = ages_.n_a();
  const double dt = ages_.da();
  if (P_[n_a - 1] > 1e-8)
    throw NumericalError("age domain truncated: survivor mass " +
                         std::to_string(P_[n_a - 1]) + " at a_max");

  const double mu = stim_.mu(t_);
  const auto vstep = op_.implicit_step(mu, dt);

  // Shift: the ring head moves back one slot; the previous last slice
  // becomes the (overwritten) slice 0 slot.
  head_ = (head_ + n_a - 1) % n_a;

  std::vector<double> P_new(n_a, 0.0);
  std::vector<double> isi_row(n_a, 0.0);
  std::vector<double> haz_row(n_a, 0.0);
  double last_good = 0.0;
  for (int k = n_a - 1; k >= 1; --k) {
    std::vector<double>& sl = slices_[(head_ + k) % n_a];
    const double flux = vstep.apply(sl);
    const double p_prev = P_[k - 1];
    P_new[k] = p_prev - flux * dt;
    isi_row[k] = flux;
    if (P_new[k] >= kHazardFloorP && p_prev > 0.0) {
      haz_row[k] = std::log(p_prev / P_new[k]) / dt;
      last_good = haz_row[k];
    } else {
      haz_row[k] = last_good;
    }
  }
  // Clamped entries above the underflow age keep the last reliable value.
  for (int k = 1; k < n_a; ++k)
    if (P_new[k] < kHazardFloorP) haz_row[k] = last_good;

  // Fresh delta at (a = 0, v_r): P(t, 0) = 1 exactly.
  std::vector<double>& sl0 = slices_[head_];
  std::fill(sl0.begin(), sl0.end(), 0.0);
  deposit_delta(grid_, grid_.v_r(), 1.0, sl0);
  P_new[0] = 1.0;

  P_ = std::move(P_new);
  row_times_.push_back(t_);  // start time of the step this row covers
  t_ += dt;
  P_rows_.push_back(P_);
  isi_rows_.push_back(std::move(isi_row));
  hazard_rows_.push_back(std::move(haz_row));
}

void FptNonAutonomousSolver::run(double horizon) {
  const long n = std::lround(horizon / dt());
  for (long i = 0; i < n; ++i) step();
}

HazardTable FptNonAutonomousSolver::hazard_table() const {
  HazardTable tab{ages_, {}, {}};
  tab.times = row_times_;
  tab.values.reserve(row_times_.size() * ages_.n_a());
  for (const auto& row : hazard_rows_)
    tab.values.insert(tab.values.end(), row.begin(), row.end());
  return tab;
}

}  // namespace neurodens
