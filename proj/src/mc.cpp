#include "neurodens/mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace neurodens {

namespace {

constexpr int kMaxRecordedTrajectories = 10;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-trial substream: identical (seed, trial_id) yields identical draws
// regardless of execution order across trials.
std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(trial + 1)));
}

double sample_initial(const InitialSpec& init, std::mt19937_64& rng,
                      std::normal_distribution<double>& normal,
                      bool nonnegative) {
  if (init.kind == InitialSpec::Kind::point) return init.mean;
  for (int i = 0; i < 100; ++i) {
    const double x = init.mean + init.stddev * normal(rng);
    if (!nonnegative || x >= 0.0) return x;
  }
  return 0.0;
}

// Runs `body(trial)` for every trial, split over mc.threads. Results are
// written into per-trial slots, so the outcome is independent of the
// thread count.
template <typename Body>
void for_each_trial(const McConfig& mc, Body body) {
  if (mc.threads == 1) {
    for (int trial = 0; trial < mc.n_trials; ++trial) body(trial);
    return;
  }
  std::vector<std::thread> pool;
  const int n_threads = std::min(mc.threads, mc.n_trials);
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w]() {
      for (int trial = w; trial < mc.n_trials; trial += n_threads) body(trial);
    });
  }
  for (auto& th : pool) th.join();
}

McResult simulate_langevin(const Stimulus& s, double v_r,
                           const InitialSpec& v0, const InitialSpec& age0,
                           const McConfig& mc, bool track_age,
                           const std::vector<double>& observe_times) {
  mc.validate();
  if (!(v_r < 1.0)) throw ConfigError("v_r must be below the threshold 1");

  const long n_steps = std::lround(mc.horizon / mc.dt);
  std::vector<long> obs_steps;
  for (double t : observe_times)
    obs_steps.push_back(std::lround(t / mc.dt));

  McResult out;
  out.spikes.resize(mc.n_trials);
  const int n_traj = mc.record_trajectories
                         ? std::min(mc.n_trials, kMaxRecordedTrajectories)
                         : 0;
  out.trajectories.resize(n_traj);
  out.observations.assign(
      observe_times.empty() ? 0 : mc.n_trials,
      std::vector<std::pair<double, double>>(obs_steps.size()));

  const bool constant = s.is_constant();
  const double mu_const = s.mu(0.0);
  const double noise = s.sigma() * std::sqrt(mc.dt);

  for_each_trial(mc, [&](int trial) {
    auto rng = trial_rng(mc.seed, trial);
    std::normal_distribution<double> normal(0.0, 1.0);
    double v = sample_initial(v0, rng, normal, /*nonnegative=*/false);
    double age = 0.0;
    if (track_age) {
      // Separate substream so the noise sequence driving v is identical to
      // simulate_nlif's for the same (seed, trial).
      auto rng_age = trial_rng(mc.seed ^ 0x517cc1b727220a95ULL, trial);
      std::normal_distribution<double> normal_age(0.0, 1.0);
      age = sample_initial(age0, rng_age, normal_age, /*nonnegative=*/true);
    }
    SpikeRecord rec;
    rec.trial_id = trial;
    std::vector<double>* traj = trial < n_traj ? &out.trajectories[trial] : nullptr;
    if (traj) traj->push_back(v);
    std::size_t next_obs = 0;
    while (next_obs < obs_steps.size() && obs_steps[next_obs] <= 0) {
      out.observations[trial][next_obs] = {age, v};
      ++next_obs;
    }
    for (long k = 0; k < n_steps; ++k) {
      const double t = k * mc.dt;
      const double mu = constant ? mu_const : s.mu(t);
      v += (mu - v) * mc.dt + noise * normal(rng);
      if (track_age) age += mc.dt;
      if (v >= 1.0) {
        rec.spike_times.push_back((k + 1) * mc.dt);
        v = v_r;
        if (track_age) age = 0.0;
      }
      if (traj) traj->push_back(v);
      while (next_obs < obs_steps.size() && k + 1 >= obs_steps[next_obs]) {
        out.observations[trial][next_obs] = {age, v};
        ++next_obs;
      }
    }
    out.spikes[trial] = std::move(rec);
  });
  return out;
}

}  // namespace

McResult simulate_nlif(const Stimulus& s, double v_r, const InitialSpec& v0,
                       const McConfig& mc) {
  return simulate_langevin(s, v_r, v0, InitialSpec::point(0.0), mc,
                           /*track_age=*/false, {});
}

McResult simulate_joint(const Stimulus& s, double v_r, const InitialSpec& v0,
                        const InitialSpec& age0, const McConfig& mc,
                        const std::vector<double>& observe_times) {
  return simulate_langevin(s, v_r, v0, age0, mc, /*track_age=*/true,
                           observe_times);
}

McResult simulate_escape(const HazardFn& S, const InitialSpec& age0,
                         const McConfig& mc) {
  mc.validate();
  const long n_steps = std::lround(mc.horizon / mc.dt);

  McResult out;
  out.spikes.resize(mc.n_trials);
  for_each_trial(mc, [&](int trial) {
    auto rng = trial_rng(mc.seed, trial);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double age = sample_initial(age0, rng, normal, /*nonnegative=*/true);
    SpikeRecord rec;
    rec.trial_id = trial;
    for (long k = 0; k < n_steps; ++k) {
      const double t = k * mc.dt;
      // Evaluate the hazard on the age cell the trial transitions into,
      // matching the age-structured solver's post-shift convention.
      const double s_val = S(t, age + 1.5 * mc.dt);
      if (s_val < 0.0) throw NumericalError("negative hazard encountered");
      const double p_fire = -std::expm1(-s_val * mc.dt);
      if (unif(rng) < p_fire) {
        rec.spike_times.push_back((k + 1) * mc.dt);
        age = 0.0;
      } else {
        age += mc.dt;
      }
    }
    out.spikes[trial] = std::move(rec);
  });
  return out;
}

McResult simulate_escape(const HazardTable& S, const InitialSpec& age0,
                         const McConfig& mc) {
  mc.validate();
  if (!S.autonomous()) return simulate_escape(S.fn(), age0, mc);
  if (std::abs(S.ages.da() - mc.dt) > 1e-12)
    return simulate_escape(S.fn(), age0, mc);

  const int n_a = S.ages.n_a();
  std::vector<double> p_fire(n_a);
  for (int k = 0; k < n_a; ++k) {
    if (S.values[k] < 0.0) throw NumericalError("negative hazard in table");
    p_fire[k] = -std::expm1(-S.values[k] * mc.dt);
  }

  const long n_steps = std::lround(mc.horizon / mc.dt);
  McResult out;
  out.spikes.resize(mc.n_trials);
  for_each_trial(mc, [&](int trial) {
    auto rng = trial_rng(mc.seed, trial);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double a0 = sample_initial(age0, rng, normal, /*nonnegative=*/true);
    long age_idx = std::lround(a0 / mc.dt);
    SpikeRecord rec;
    rec.trial_id = trial;
    for (long k = 0; k < n_steps; ++k) {
      if (age_idx + 1 >= n_a)
        throw NumericalError("hazard table age range exceeded by trial");
      if (unif(rng) < p_fire[age_idx + 1]) {
        rec.spike_times.push_back((k + 1) * mc.dt);
        age_idx = 0;
      } else {
        ++age_idx;
      }
    }
    out.spikes[trial] = std::move(rec);
  });
  return out;
}

FiringRateSeries psth(const std::vector<SpikeRecord>& records, double bin,
                      double horizon) {
  if (records.empty()) throw ConfigError("psth: empty record set");
  if (!(bin > 0.0)) throw ConfigError("psth: bin must be > 0");
  const int n_bins = static_cast<int>(std::ceil(horizon / bin - 1e-9));
  std::vector<long> counts(n_bins, 0);
  for (const auto& rec : records) {
    for (double t : rec.spike_times) {
      const int b = std::min(static_cast<int>(t / bin), n_bins - 1);
      if (b >= 0) ++counts[b];
    }
  }
  FiringRateSeries out;
  out.times.resize(n_bins);
  out.rates.resize(n_bins);
  const double norm = 1.0 / (static_cast<double>(records.size()) * bin);
  for (int b = 0; b < n_bins; ++b) {
    out.times[b] = (b + 0.5) * bin;
    out.rates[b] = counts[b] * norm;
  }
  return out;
}

IsiHistogram isi_histogram(const std::vector<SpikeRecord>& records, double bin,
                           double max_isi, bool include_first) {
  if (!(bin > 0.0)) throw ConfigError("isi_histogram: bin must be > 0");
  const int n_bins = static_cast<int>(std::ceil(max_isi / bin - 1e-9));
  std::vector<long> counts(n_bins, 0);
  long total = 0;
  for (const auto& rec : records) {
    const auto& ts = rec.spike_times;
    for (std::size_t i = include_first ? 0 : 1; i < ts.size(); ++i) {
      const double isi = (i == 0) ? ts[0] : ts[i] - ts[i - 1];
      ++total;
      const int b = static_cast<int>(isi / bin);
      if (b >= 0 && b < n_bins) ++counts[b];
    }
  }
  if (total == 0) throw NumericalError("isi_histogram: no intervals found");
  IsiHistogram out;
  out.n_intervals = total;
  out.centers.resize(n_bins);
  out.density.resize(n_bins);
  for (int b = 0; b < n_bins; ++b) {
    out.centers[b] = (b + 0.5) * bin;
    out.density[b] = counts[b] / (static_cast<double>(total) * bin);
  }
  return out;
}

}  // namespace neurodens
