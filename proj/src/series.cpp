#include "neurodens/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neurodens/errors.hpp"

namespace neurodens {

std::vector<double> resample_linear(const std::vector<double>& times,
                                    const std::vector<double>& values,
                                    const std::vector<double>& query) {
  if (times.empty() || times.size() != values.size())
    throw ConfigError("resample: malformed series");
  std::vector<double> out;
  out.reserve(query.size());
  for (double t : query) {
    if (t <= times.front()) {
      out.push_back(values.front());
      continue;
    }
    if (t >= times.back()) {
      out.push_back(values.back());
      continue;
    }
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    out.push_back(values[lo] + w * (values[hi] - values[lo]));
  }
  return out;
}

SeriesDiscrepancy compare_series(const FiringRateSeries& x,
                                 const FiringRateSeries& y) {
  if (x.times.empty() || y.times.empty())
    throw ConfigError("compare_series: empty series");
  const std::vector<double>& ys =
      (x.times == y.times) ? y.rates : resample_linear(y.times, y.rates, x.times);

  double l1 = 0.0, linf = 0.0, nx1 = 0.0, nxinf = 0.0;
  for (std::size_t i = 0; i < x.rates.size(); ++i) {
    const double d = std::abs(x.rates[i] - ys[i]);
    l1 += d;
    linf = std::max(linf, d);
    nx1 += std::abs(x.rates[i]);
    nxinf = std::max(nxinf, std::abs(x.rates[i]));
  }
  SeriesDiscrepancy out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  out.l1_rel = (nx1 > 0.0) ? l1 / nx1 : (l1 > 0.0 ? inf : 0.0);
  out.linf_rel = (nxinf > 0.0) ? linf / nxinf : (linf > 0.0 ? inf : 0.0);
  return out;
}

}  // namespace neurodens
