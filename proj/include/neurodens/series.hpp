#pragma once

#include <vector>

namespace neurodens {

struct FiringRateSeries {
  std::vector<double> times;
  std::vector<double> rates;  // events per time
};

struct SpikeRecord {
  int trial_id = 0;
  std::vector<double> spike_times;  // strictly increasing
};

struct SeriesDiscrepancy {
  double l1_rel = 0.0;
  double linf_rel = 0.0;
};

// Relative L1/Linf discrepancy, normalized by the L1/Linf norm of x.
// y is resampled onto x's time grid by linear interpolation (clamped)
// when the grids differ.
SeriesDiscrepancy compare_series(const FiringRateSeries& x,
                                 const FiringRateSeries& y);

// Linear interpolation of (times, values) at query points, clamped at the
// endpoints.
std::vector<double> resample_linear(const std::vector<double>& times,
                                    const std::vector<double>& values,
                                    const std::vector<double>& query);

}  // namespace neurodens
