#pragma once

#include <cstdint>
#include <vector>

#include "wattbench/agg/timeline.hpp"
#include "wattbench/core/types.hpp"

namespace wattbench::ref {

// Knobs for the synthetic timeline generator used by metric comparison tests
// and the kernel benchmark. Traces cover the usual shapes: multi-replica
// services with staggered lifespans, spotty samples, platform pods, and a
// node-level power row.
struct TraceGenConfig {
  int seconds = 120;
  int services = 2;
  int max_replicas = 3;
  double missing_prob = 0.05;
  bool platform_rows = true;
  bool node_row = true;
};

/// Deterministic function of (seed, config); timelines come back in the same
/// sorted order build_timelines() produces. Service names are "svc-0",
/// "svc-1", ...; pass them to make_sut_selector for metric evaluation.
std::vector<ResourceTimeline> make_random_timelines(std::uint64_t seed,
                                                    const TraceGenConfig& config);

/// Random request log paired with the traces: mixed successes and failures
/// with latencies spread over a few decades.
std::vector<RequestRecord> make_random_requests(std::uint64_t seed, int count,
                                                double window_start, double window_end);

}  // namespace wattbench::ref
