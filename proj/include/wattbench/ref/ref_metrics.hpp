#pragma once

#include <vector>

#include "wattbench/agg/energy.hpp"
#include "wattbench/agg/timeline.hpp"
#include "wattbench/core/types.hpp"

namespace wattbench::ref {

// Straight-line per-second scans of the metric definitions, kept deliberately
// simple and separate from the library's optimized paths. Tests and the
// benchmark tool compare the two; nothing in the product links this library.
//
// Fold orders are part of the metric definitions (documented alongside the
// optimized kernels): energies accumulate per replica then across replicas in
// timeline order; per-second quantities accumulate across seconds ascending.

/// Joules attributed to the system under test: per-replica sums, then summed
/// across replicas in timeline order.
double sut_joules(const std::vector<ResourceTimeline>& timelines, const SutSelector& is_sut);

double overhead_joules(const std::vector<ResourceTimeline>& timelines, const SutSelector& is_sut);

/// WR: sut energy over successful request count.
double request_consumption(const std::vector<ResourceTimeline>& timelines,
                           const SutSelector& is_sut, long long successful_requests);

/// RO: overhead / (overhead + sut).
double runtime_overhead(const std::vector<ResourceTimeline>& timelines, const SutSelector& is_sut);

/// RU: mean over seconds of the equal-weight average of cpu and mem
/// utilization, with provisioned capacity following live replicas.
double resource_utilization(const std::vector<ResourceTimeline>& timelines,
                            const SutSelector& is_sut);

/// RE: per-second over-provisioning scan under the threshold + peer-headroom
/// rule; sums the wattage of over-provisioned replicas.
double scaling_waste(const std::vector<ResourceTimeline>& timelines, const OverProvisionRule& rule,
                     const SutSelector& is_sut);

}  // namespace wattbench::ref
