#include "wattbench/collect/enrich.hpp"

namespace wattbench {

EnrichStats enrich(std::vector<MeasurementSample>& samples, const TopologyMap& topology) {
  EnrichStats stats;
  for (auto& s : samples) {
    if (s.pod.empty()) {
      stats.node_level++;
      continue;
    }
    auto it = topology.find(s.pod);
    if (it == topology.end()) {
      s.unattributed = true;
      stats.unattributed++;
      continue;
    }
    if (s.node.empty()) s.node = it->second.node;
    s.service = it->second.service;
    s.layer = it->second.layer;
    stats.attributed++;
  }
  return stats;
}

Layer classify_layer(const std::string& pod, const std::string& service,
                     const std::vector<std::string>& platform_prefixes, Layer fallback) {
  auto matches = [&](const std::string& name) {
    for (const auto& prefix : platform_prefixes)
      if (name.size() >= prefix.size() && name.compare(0, prefix.size(), prefix) == 0) return true;
    return false;
  };
  if (matches(pod) || matches(service)) return Layer::platform;
  return fallback;
}

}  // namespace wattbench
