#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "neurodens/errors.hpp"

namespace neurodens {

// Mean input mu(t) plus noise intensity sigma. Either a constant or a
// sampled waveform with linear interpolation, clamped outside the sampled
// range.
class Stimulus {
 public:
  static Stimulus constant(double mu0, double sigma) {
    return Stimulus(mu0, sigma, {});
  }

  static Stimulus waveform(std::vector<std::pair<double, double>> samples,
                           double sigma) {
    if (samples.empty()) throw ConfigError("stimulus waveform has no samples");
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (samples[i].first <= samples[i - 1].first)
        throw ConfigError("stimulus waveform times must be strictly increasing");
    }
    const double mu0 = samples.front().second;
    return Stimulus(mu0, sigma, std::move(samples));
  }

  double mu(double t) const {
    if (samples_.empty()) return mu0_;
    if (t <= samples_.front().first) return samples_.front().second;
    if (t >= samples_.back().first) return samples_.back().second;
    auto it = std::upper_bound(
        samples_.begin(), samples_.end(), t,
        [](double v, const std::pair<double, double>& s) { return v < s.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (t - lo.first) / (hi.first - lo.first);
    return lo.second + w * (hi.second - lo.second);
  }

  double sigma() const { return sigma_; }
  bool is_constant() const { return samples_.empty(); }
  const std::vector<std::pair<double, double>>& samples() const {
    return samples_;
  }

 private:
  Stimulus(double mu0, double sigma,
           std::vector<std::pair<double, double>> samples)
      : mu0_(mu0), sigma_(sigma), samples_(std::move(samples)) {
    if (!(sigma > 0.0)) throw ConfigError("stimulus sigma must be > 0");
  }

  double mu0_;
  double sigma_;
  std::vector<std::pair<double, double>> samples_;
};

}  // namespace neurodens
