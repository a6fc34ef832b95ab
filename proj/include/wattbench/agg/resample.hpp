#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wattbench/core/types.hpp"

namespace wattbench {

/// One-second-grid series with explicit missing markers. Values at missing
/// positions are unspecified and must not be read.
struct Series {
  double grid_start = 0;
  std::vector<double> values;
  std::vector<bool> missing;

  size_t size() const { return values.size(); }
  bool has(size_t i) const { return i < missing.size() && !missing[i]; }

  bool operator==(const Series&) const = default;
};

Series make_missing_series(double grid_start, int n);

/// Aligns gauge samples onto the grid of n one-second cells starting at
/// grid_start. Cell s takes the last observation before the cell's end;
/// a cell more than max_gap_fill seconds past that observation stays missing,
/// as does everything after the final observation (a replica is only live
/// between its first and last reading).
Series resample_gauge(std::vector<MeasurementSample> samples, double grid_start, int n,
                      int max_gap_fill);

struct CounterResample {
  Series series;  // per-second rates
  int resets = 0;
};

/// Converts cumulative-counter samples to per-second rates via successive
/// differences. A decrease is a counter reset: the post-reset value is taken
/// as the increment. Each rate covers the grid cells between its two
/// observations, so the rates integrate back to the counter's total growth.
CounterResample resample_counter(std::vector<MeasurementSample> samples, double grid_start, int n);

/// Fraction of whole seconds in [t0, t1) that have at least one sample from
/// the given source. This runs on raw journal samples, before any gap fill,
/// so injected losses show up undisguised.
double coverage_fraction(const std::vector<MeasurementSample>& samples, const std::string& source,
                         double t0, double t1);

}  // namespace wattbench
