#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wattbench/agg/timeline.hpp"
#include "wattbench/collect/collectors.hpp"
#include "wattbench/collect/enrich.hpp"
#include "wattbench/sim/topology.hpp"
#include "wattbench/workload/drive.hpp"

namespace wattbench {

struct ScalingEvent {
  std::int64_t second = 0;  // decision second; the new size serves from the next one
  std::string service;
  int from = 0;
  int to = 0;
  std::string reason;  // scale_up | scale_down | scale_to_zero | wake

  bool operator==(const ScalingEvent&) const = default;
};

/// What the cluster knows it did, folded from its own recorded series. The
/// joule totals integrate the emitted watt series (1 s cells) in row order,
/// so re-integrating the trace reproduces them bit for bit.
struct SimGroundTruth {
  double sut_joules = 0;       // replica rows
  double overhead_joules = 0;  // per-node platform remainder rows
  double waste_joules = 0;     // energy of over-provisioned replica seconds
  std::optional<double> utilization_mean;  // unset when no second had live capacity
  std::int64_t injected = 0;
  std::int64_t served = 0;
  std::int64_t failed = 0;
  std::int64_t queued_at_end = 0;

  bool operator==(const SimGroundTruth&) const = default;
};

std::string render_sim_truth(const SimGroundTruth& t);
SimGroundTruth parse_sim_truth(const std::string& json_text);

/// Full per-second record of one simulated run, on the same timeline type the
/// aggregator produces, so everything downstream treats simulated and
/// recorded runs alike.
struct SimTrace {
  double base_time = 0;
  std::int64_t seconds = 0;
  std::vector<ResourceTimeline> timelines;  // replica, platform, then node rows
  std::vector<std::int64_t> served_per_second;
  std::vector<std::int64_t> failed_per_second;
  std::vector<ScalingEvent> events;
  SimGroundTruth truth;

  bool operator==(const SimTrace&) const = default;
};

/// Discrete-time cluster model (1 s steps). Requests submitted during a
/// second queue per service; end_second drains queues, books utilization and
/// power, and lets the autoscaler act. Deterministic in (topology, seed,
/// submission sequence).
class SimCluster : public VirtualTarget {
 public:
  SimCluster(Topology topo, std::uint64_t seed, double base_time = 0.0);
  ~SimCluster() override;

  void begin_second(std::int64_t t) override;
  SubmitResult submit(double now, const ScenarioStep& step) override;
  void end_second(std::int64_t t) override;

  /// Injects n requests against the "/" route spread across the next second
  /// and advances the clock by one second.
  void step(std::int64_t n_requests);

  /// Seals the run: materializes timelines and folds the ground-truth
  /// ledger. Call once, after the last second.
  SimTrace finish();

  /// Every pod that can exist under this topology, for sample attribution
  /// and workload-node isolation.
  TopologyMap pod_map() const;

  const Topology& topology() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SimResult {
  SimTrace trace;
  DriveResult drive;

  bool operator==(const SimResult&) const = default;
};

/// Drives the schedule against a fresh cluster on the virtual clock.
/// Identical inputs give identical results, member for member.
SimResult run_sim(const Topology& topo, const UserSchedule& schedule, const Scenario& scenario,
                  std::uint64_t seed, double base_time = 0.0);

/// Same map as SimCluster::pod_map, derivable from the topology alone (slot
/// names and placement are static).
TopologyMap sim_pod_map(const Topology& topo);

/// Serves a finished trace to the collector layer: each query picks the rows
/// of its layer and emits one sample per grid second inside [t0, t1).
class SimTraceSource : public SimSource {
 public:
  explicit SimTraceSource(const SimTrace& trace) : trace_(&trace) {}
  std::vector<MeasurementSample> sample_window(const CollectorConfig& config, double t0,
                                               double t1) override;

 private:
  const SimTrace* trace_;
};

}  // namespace wattbench
