#include "wattbench/agg/clean.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace wattbench {

namespace {

double median_inplace(std::vector<double>& xs) {
  const size_t n = xs.size();
  const size_t mid = n / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  const double hi = xs[mid];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + mid);
  return (lo + hi) / 2.0;
}

}  // namespace

CleanResult clean(const Series& series, const CleaningConfig& config) {
  CleanResult out{series, 0};
  if (config.method == CleaningConfig::Method::none) return out;

  std::vector<double> present;
  for (size_t i = 0; i < series.size(); i++)
    if (series.has(i)) present.push_back(series.values[i]);
  if (present.size() < 3) return out;  // too little data to call anything an outlier

  const double med = median_inplace(present);
  std::vector<double> devs;
  devs.reserve(present.size());
  for (double x : present) devs.push_back(std::abs(x - med));
  const double mad = median_inplace(devs);

  const double cutoff = config.mad_k * mad;
  for (size_t i = 0; i < series.size(); i++) {
    if (!series.has(i)) continue;
    if (std::abs(series.values[i] - med) > cutoff) {
      out.series.missing[i] = true;
      out.series.values[i] = 0.0;
      out.removed++;
    }
  }
  return out;
}

}  // namespace wattbench
