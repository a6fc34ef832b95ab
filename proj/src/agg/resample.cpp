#include "wattbench/agg/resample.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wattbench {

Series make_missing_series(double grid_start, int n) {
  Series s;
  s.grid_start = grid_start;
  s.values.assign(static_cast<size_t>(n), 0.0);
  s.missing.assign(static_cast<size_t>(n), true);
  return s;
}

namespace {

void sort_by_ts(std::vector<MeasurementSample>& samples) {
  std::stable_sort(samples.begin(), samples.end(),
                   [](const MeasurementSample& a, const MeasurementSample& b) {
                     return a.ts < b.ts;
                   });
}

}  // namespace

Series resample_gauge(std::vector<MeasurementSample> samples, double grid_start, int n,
                      int max_gap_fill) {
  auto out = make_missing_series(grid_start, n);
  if (samples.empty()) return out;
  sort_by_ts(samples);
  const double last_ts = samples.back().ts;

  size_t next = 0;                      // first sample not yet passed
  double held = 0, held_ts = 0;
  bool holding = false;
  for (int s = 0; s < n; s++) {
    const double cell_start = grid_start + s;
    if (cell_start > last_ts) break;  // trailing cells stay missing
    const double cell_end = cell_start + 1;
    while (next < samples.size() && samples[next].ts < cell_end) {
      held = samples[next].value;
      held_ts = samples[next].ts;
      holding = true;
      next++;
    }
    if (!holding) continue;  // leading cells before the first observation
    const double gap = cell_start - held_ts;
    if (gap > max_gap_fill) continue;
    out.values[static_cast<size_t>(s)] = held;
    out.missing[static_cast<size_t>(s)] = false;
  }
  return out;
}

CounterResample resample_counter(std::vector<MeasurementSample> samples, double grid_start, int n) {
  CounterResample out;
  out.series = make_missing_series(grid_start, n);
  if (samples.size() < 2) return out;
  sort_by_ts(samples);

  for (size_t i = 1; i < samples.size(); i++) {
    const double t_prev = samples[i - 1].ts;
    const double t = samples[i].ts;
    const double dt = t - t_prev;
    if (dt <= 0) continue;
    double increment = samples[i].value - samples[i - 1].value;
    if (increment < 0) {  // counter reset
      out.resets++;
      increment = samples[i].value;
    }
    const double rate = increment / dt;
    // The rate covers every cell whose start lies in [t_prev, t).
    int s0 = static_cast<int>(std::ceil(t_prev - grid_start));
    if (grid_start + s0 < t_prev) s0++;  // guard against ceil landing short
    for (int s = std::max(0, s0); s < n && grid_start + s < t; s++) {
      out.series.values[static_cast<size_t>(s)] = rate;
      out.series.missing[static_cast<size_t>(s)] = false;
    }
  }
  return out;
}

double coverage_fraction(const std::vector<MeasurementSample>& samples, const std::string& source,
                         double t0, double t1) {
  const auto total = static_cast<std::int64_t>(std::floor(t1 - t0));
  if (total <= 0) return 0.0;
  std::set<std::int64_t> covered;
  for (const auto& s : samples) {
    if (s.source != source || s.ts < t0 || s.ts >= t1) continue;
    covered.insert(static_cast<std::int64_t>(std::floor(s.ts - t0)));
  }
  return static_cast<double>(covered.size()) / static_cast<double>(total);
}

}  // namespace wattbench
