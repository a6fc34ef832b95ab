#pragma once

#include <map>
#include <string>
#include <vector>

#include "wattbench/agg/resample.hpp"
#include "wattbench/core/types.hpp"

namespace wattbench {

enum class LifecycleEventKind { created, ready, terminated };

const char* lifecycle_event_name(LifecycleEventKind k);

struct LifecycleEvent {
  LifecycleEventKind kind = LifecycleEventKind::created;
  double ts = 0;

  bool operator==(const LifecycleEvent&) const = default;
};

/// Per-replica view of the run on the 1 s grid. All three series share the
/// grid; a replica's liveness is bounded by its first and last observation.
struct ResourceTimeline {
  std::string replica;  // pod id; empty for node-level series
  std::string service;
  std::string node;
  Layer layer = Layer::service;
  double grid_start = 0;  // step is fixed at 1 s
  Series cpu_millicores;
  Series mem_bytes;
  Series watts;
  ResourceSpec limits;
  std::vector<LifecycleEvent> lifecycle;

  bool operator==(const ResourceTimeline&) const = default;
};

struct TimelineConfig {
  double t0 = 0;
  double t1 = 0;  // half-open run window; the grid has floor(t1 - t0) cells
  CleaningConfig cleaning;
  std::map<std::string, ResourceSpec> limits_by_service;
};

struct TimelineStats {
  int outliers_removed = 0;
  int counter_resets = 0;
  std::int64_t unattributed_samples = 0;
};

/// Groups enriched samples by replica, resamples each kind onto the grid,
/// cleans outliers, and attaches limits and lifecycle events. cpu_fraction
/// samples are converted to millicores against the service's limit (dropped
/// with a warning when no limit is known). Node-level watt series become
/// timelines with an empty replica id. Output is sorted by (layer, service,
/// replica) and independent of input order.
std::vector<ResourceTimeline> build_timelines(const std::vector<MeasurementSample>& samples,
                                              const TimelineConfig& config,
                                              TimelineStats* stats = nullptr);

}  // namespace wattbench
