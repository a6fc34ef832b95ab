#include "wattbench/report/compare.hpp"

#include <algorithm>

namespace wattbench {

const std::vector<std::string>& comparison_metrics() {
  static const std::vector<std::string> kMetrics = {
      "wr", "ro", "ru", "re", "ac", "tc", "consumed_cost", "cost_per_kilorequest",
      "fr", "rqs", "lat_p50", "lat_p95"};
  return kMetrics;
}

const std::vector<std::string>& component_metrics() {
  static const std::vector<std::string> kComponents = {"sut_joules", "overhead_joules"};
  return kComponents;
}

bool lower_is_better(const std::string& metric) { return metric != "ru" && metric != "rqs"; }

std::string metric_unit(const std::string& metric) {
  if (metric == "wr") return "J/req";
  if (metric == "re" || metric == "ac" || metric == "sut_joules" || metric == "overhead_joules")
    return "J";
  if (metric == "tc" || metric == "consumed_cost") return "$";
  if (metric == "cost_per_kilorequest") return "c/1000req";
  if (metric == "rqs") return "req/s";
  if (metric == "lat_p50" || metric == "lat_p95") return "s";
  return "";  // ro, ru, fr are fractions
}

std::optional<double> metric_value(const MetricsReport& r, const std::string& metric) {
  if (metric == "wr") return r.wr;
  if (metric == "ro") return r.ro;
  if (metric == "ru") return r.ru;
  if (metric == "re") return r.re;
  if (metric == "ac") return r.ac;
  if (metric == "tc") return r.tc;
  if (metric == "consumed_cost") return r.consumed_cost;
  if (metric == "cost_per_kilorequest") return r.cost_per_kilorequest;
  if (metric == "fr") return r.fr;
  if (metric == "rqs") return r.rqs;
  if (metric == "lat_p50") return r.lat_p50;
  if (metric == "lat_p95") return r.lat_p95;
  if (metric == "sut_joules") return r.total_sut_joules;
  if (metric == "overhead_joules") return r.total_overhead_joules;
  return std::nullopt;
}

namespace {

void note_first_appearance(std::vector<std::string>& order, const std::string& name) {
  if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
}

}  // namespace

ComparisonTable compile_comparison(const std::vector<CellOutcome>& outcomes) {
  ComparisonTable table;
  // workload -> metric -> variant -> values over repetitions
  std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>> raw;

  for (const auto& cell : outcomes) {
    note_first_appearance(table.variants, cell.variant);
    note_first_appearance(table.workloads, cell.workload);
    if (!cell.done) {
      table.gaps.push_back(cell.variant + "/" + cell.workload + " repetition " +
                           std::to_string(cell.repetition) + ": no metrics (faulty)");
      continue;
    }
    for (const auto& metrics : {comparison_metrics(), component_metrics()}) {
      for (const auto& m : metrics) {
        if (auto v = metric_value(cell.metrics, m)) {
          raw[cell.workload][m][cell.variant].push_back(*v);
        } else {
          table.gaps.push_back(cell.variant + "/" + cell.workload + " repetition " +
                               std::to_string(cell.repetition) + ": " + m + " undefined");
        }
      }
    }
  }

  for (const auto& [workload, by_metric] : raw) {
    for (const auto& [metric, by_variant] : by_metric) {
      for (const auto& [variant, values] : by_variant) {
        StatCell s;
        s.repetitions = static_cast<int>(values.size());
        s.min = *std::min_element(values.begin(), values.end());
        s.max = *std::max_element(values.begin(), values.end());
        double sum = 0;
        for (double v : values) sum += v;
        s.mean = sum / static_cast<double>(values.size());
        table.cells[workload][metric][variant] = s;
      }
    }
  }

  // Rank each (workload, ranked metric) column by mean. The ordering puts the
  // winning value first and breaks value ties by variant name, so front and
  // back are distinct whenever the column has two entries; with every value
  // equal the marks land on the lexicographic extremes.
  for (const auto& [workload, by_metric] : table.cells) {
    for (const auto& m : comparison_metrics()) {
      auto it = by_metric.find(m);
      if (it == by_metric.end() || it->second.size() < 2) continue;
      std::vector<std::pair<double, std::string>> ranked;
      for (const auto& [variant, s] : it->second) ranked.emplace_back(s.mean, variant);
      const bool lower = lower_is_better(m);
      std::sort(ranked.begin(), ranked.end(), [lower](const auto& a, const auto& b) {
        if (a.first != b.first) return lower ? a.first < b.first : a.first > b.first;
        return a.second < b.second;
      });
      table.best[workload][m] = ranked.front().second;
      table.worst[workload][m] = ranked.back().second;
      table.best_tied[workload][m] = ranked[0].first == ranked[1].first;
      table.worst_tied[workload][m] =
          ranked[ranked.size() - 1].first == ranked[ranked.size() - 2].first;
    }
  }
  return table;
}

}  // namespace wattbench
