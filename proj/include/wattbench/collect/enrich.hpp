#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wattbench/core/types.hpp"

namespace wattbench {

/// What the cluster (or the simulator) knows about a pod.
struct PodInfo {
  std::string node;
  std::string service;
  Layer layer = Layer::service;

  bool operator==(const PodInfo&) const = default;
};

using TopologyMap = std::map<std::string, PodInfo>;

struct EnrichStats {
  std::int64_t attributed = 0;
  std::int64_t unattributed = 0;
  std::int64_t node_level = 0;  // samples without a pod id, left as-is
};

/// Annotates samples in place with node/service attribution from the
/// topology. The topology's layer wins for known pods (it knows which pods
/// are platform infrastructure); unknown pods are tagged unattributed and
/// counted. Lossless: no sample is dropped or reordered.
EnrichStats enrich(std::vector<MeasurementSample>& samples, const TopologyMap& topology);

/// Classifies a pod by the configured platform prefixes: a pod whose name or
/// service matches a prefix is platform infrastructure, anything else keeps
/// the given default layer.
Layer classify_layer(const std::string& pod, const std::string& service,
                     const std::vector<std::string>& platform_prefixes, Layer fallback);

}  // namespace wattbench
