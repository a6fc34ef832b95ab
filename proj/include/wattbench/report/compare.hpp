#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wattbench/metrics/metrics.hpp"

namespace wattbench {

/// One finished repetition feeding the comparison. Cells that never produced
/// a report (faulty after all retries) arrive with done = false and show up
/// as gaps rather than numbers.
struct CellOutcome {
  std::string variant;
  std::string workload;
  int repetition = 1;
  bool done = false;
  MetricsReport metrics;

  bool operator==(const CellOutcome&) const = default;
};

/// Aggregate of one (workload, metric, variant) cell over repetitions.
struct StatCell {
  double mean = 0;
  double min = 0;
  double max = 0;
  int repetitions = 0;

  bool operator==(const StatCell&) const = default;
};

/// Ranked metric columns in display order, keyed like metrics.json.
const std::vector<std::string>& comparison_metrics();

/// Unranked component columns (energy split) carried for plots and the CSV
/// but never marked best/worst.
const std::vector<std::string>& component_metrics();

/// True when smaller values win the column (everything except ru and rqs).
bool lower_is_better(const std::string& metric);

/// Human unit suffix for a column header; empty for dimensionless metrics.
std::string metric_unit(const std::string& metric);

/// Pulls one column value out of a report; nullopt when the metric is unset.
std::optional<double> metric_value(const MetricsReport& r, const std::string& metric);

/// Cross-variant comparison: one row per variant, one column per
/// (workload, ranked metric), each cell the mean with min-max range over the
/// completed repetitions. Best and worst are marked per column as soon as two
/// variants have values there; value ties resolve to the lexicographically
/// first (best) or last (worst) variant name and raise the tie flag.
struct ComparisonTable {
  std::vector<std::string> variants;   // row order: first appearance
  std::vector<std::string> workloads;  // column-group order: first appearance
  // workload -> metric -> variant -> stats
  std::map<std::string, std::map<std::string, std::map<std::string, StatCell>>> cells;
  // workload -> metric -> marked variant; present only when the column ranks.
  std::map<std::string, std::map<std::string, std::string>> best;
  std::map<std::string, std::map<std::string, std::string>> worst;
  std::map<std::string, std::map<std::string, bool>> best_tied;
  std::map<std::string, std::map<std::string, bool>> worst_tied;
  // Human-readable notes about repetitions that produced no numbers.
  std::vector<std::string> gaps;

  bool operator==(const ComparisonTable&) const = default;
};

/// Folds per-repetition outcomes into the table. Repetitions with done set
/// contribute every metric their report defines; the rest are listed in
/// gaps. Ranking is by column mean.
ComparisonTable compile_comparison(const std::vector<CellOutcome>& outcomes);

}  // namespace wattbench
