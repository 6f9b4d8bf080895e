#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "neurodens/as1d.hpp"
#include "neurodens/errors.hpp"
#include "neurodens/series.hpp"
#include "neurodens/stimulus.hpp"

namespace neurodens {

struct McConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  int n_trials = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  bool record_trajectories = false;

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("mc: dt must be > 0");
    if (!(horizon >= dt)) throw ConfigError("mc: horizon must be >= dt");
    if (n_trials < 1) throw ConfigError("mc: n_trials must be >= 1");
    if (threads < 1) throw ConfigError("mc: threads must be >= 1");
  }
};

// Initial state: a point value or a Gaussian sampled per trial.
struct InitialSpec {
  enum class Kind { point, gaussian };
  Kind kind = Kind::point;
  double mean = 0.0;
  double stddev = 0.0;

  static InitialSpec point(double v) { return {Kind::point, v, 0.0}; }
  static InitialSpec gaussian(double mean, double stddev) {
    return {Kind::gaussian, mean, stddev};
  }
};

struct McResult {
  std::vector<SpikeRecord> spikes;  // ordered by trial_id
  // Potential per step for the first few trials, when requested.
  std::vector<std::vector<double>> trajectories;
  // observations[trial][j] = (age, potential) at observe_times[j].
  std::vector<std::vector<std::pair<double, double>>> observations;
};

// Euler-Maruyama simulation of the Langevin-with-reset process; a spike is
// recorded at the step's end time and v is reset within the same step.
McResult simulate_nlif(const Stimulus& s, double v_r, const InitialSpec& v0,
                       const McConfig& mc);

// Same process decorated with the age variable (resets to 0 on spikes).
// With identical config and seed the spike times match simulate_nlif
// exactly. Requested observation times snap to step boundaries.
McResult simulate_joint(const Stimulus& s, double v_r, const InitialSpec& v0,
                        const InitialSpec& age0, const McConfig& mc,
                        const std::vector<double>& observe_times = {});

// Hazard-driven renewal process: each step fires with probability
// 1 - exp(-S dt) (exact exponential thinning of the step).
McResult simulate_escape(const HazardFn& S, const InitialSpec& age0,
                         const McConfig& mc);

// Fast path for autonomous hazard tables: per-step fire probabilities are
// precomputed per age cell. Ages beyond the table are an error.
McResult simulate_escape(const HazardTable& S, const InitialSpec& age0,
                         const McConfig& mc);

// Peri-stimulus time histogram: rate per bin = count / (n_trials * bin).
FiringRateSeries psth(const std::vector<SpikeRecord>& records, double bin,
                      double horizon);

struct IsiHistogram {
  std::vector<double> centers;
  std::vector<double> density;  // normalized to unit mass
  long n_intervals = 0;
};

// Pools consecutive-spike differences across trials. The interval from
// t = 0 to the first spike is excluded by default (the initial state is
// not a reset state).
IsiHistogram isi_histogram(const std::vector<SpikeRecord>& records, double bin,
                           double max_isi, bool include_first = false);

}  // namespace neurodens
