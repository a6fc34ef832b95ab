#include "wattbench/ref/ref_metrics.hpp"

#include <cmath>
#include <cstddef>

#include "wattbench/metrics/metrics.hpp"

namespace wattbench::ref {

namespace {

bool counted(const ResourceTimeline& tl, const SutSelector& is_sut, bool want_sut) {
  if (tl.replica.empty()) return false;  // node rows sit outside the split
  return is_sut(tl.service, tl.layer) == want_sut;
}

double joules_of(const ResourceTimeline& tl) {
  double j = 0;
  for (std::size_t t = 0; t < tl.watts.size(); t++) {
    if (tl.watts.has(t)) j += tl.watts.values[t];
  }
  return j;
}

std::size_t grid_cells(const std::vector<ResourceTimeline>& timelines) {
  std::size_t n = 0;
  for (const auto& tl : timelines) {
    if (tl.cpu_millicores.size() > n) n = tl.cpu_millicores.size();
  }
  return n;
}

}  // namespace

double sut_joules(const std::vector<ResourceTimeline>& timelines, const SutSelector& is_sut) {
  double total = 0;
  for (const auto& tl : timelines) {
    if (counted(tl, is_sut, true)) total += joules_of(tl);
  }
  return total;
}

double overhead_joules(const std::vector<ResourceTimeline>& timelines, const SutSelector& is_sut) {
  double total = 0;
  for (const auto& tl : timelines) {
    if (counted(tl, is_sut, false)) total += joules_of(tl);
  }
  return total;
}

double request_consumption(const std::vector<ResourceTimeline>& timelines,
                           const SutSelector& is_sut, long long successful_requests) {
  return sut_joules(timelines, is_sut) / static_cast<double>(successful_requests);
}

double runtime_overhead(const std::vector<ResourceTimeline>& timelines,
                        const SutSelector& is_sut) {
  const double o = overhead_joules(timelines, is_sut);
  const double s = sut_joules(timelines, is_sut);
  return o / (o + s);
}

double resource_utilization(const std::vector<ResourceTimeline>& timelines,
                            const SutSelector& is_sut) {
  const std::size_t n = grid_cells(timelines);
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < n; t++) {
    double used_cpu = 0, prov_cpu = 0, used_mem = 0, prov_mem = 0;
    for (const auto& tl : timelines) {
      if (!counted(tl, is_sut, true)) continue;
      const bool live = tl.cpu_millicores.has(t) || tl.mem_bytes.has(t) || tl.watts.has(t);
      if (!live) continue;
      prov_cpu += static_cast<double>(tl.limits.cpu_limit_millicores);
      prov_mem += static_cast<double>(tl.limits.mem_limit_bytes);
      if (tl.cpu_millicores.has(t)) used_cpu += tl.cpu_millicores.values[t];
      if (tl.mem_bytes.has(t)) used_mem += tl.mem_bytes.values[t];
    }
    if (prov_cpu > 0 && prov_mem > 0) {
      sum += 0.5 * (used_cpu / prov_cpu + used_mem / prov_mem);
      count++;
    }
  }
  if (count == 0) return std::nan("");
  return sum / static_cast<double>(count);
}

double scaling_waste(const std::vector<ResourceTimeline>& timelines, const OverProvisionRule& rule,
                     const SutSelector& is_sut) {
  const std::size_t n = grid_cells(timelines);
  double total = 0;
  for (std::size_t t = 0; t < n; t++) {
    double second = 0;
    for (std::size_t i = 0; i < timelines.size(); i++) {
      const auto& cand = timelines[i];
      if (!counted(cand, is_sut, true)) continue;
      if (!cand.cpu_millicores.has(t) || !cand.mem_bytes.has(t)) continue;
      const double cpu_limit = static_cast<double>(cand.limits.cpu_limit_millicores);
      const double mem_limit = static_cast<double>(cand.limits.mem_limit_bytes);
      if (cpu_limit <= 0 || mem_limit <= 0) continue;
      const double used_cpu = cand.cpu_millicores.values[t];
      const double used_mem = cand.mem_bytes.values[t];
      if (!(used_cpu / cpu_limit < rule.cpu_threshold)) continue;
      if (!(used_mem / mem_limit < rule.mem_threshold)) continue;
      if (rule.require_peer_headroom) {
        bool absorbable = false;
        for (std::size_t j = 0; j < timelines.size() && !absorbable; j++) {
          if (j == i) continue;
          const auto& peer = timelines[j];
          if (!counted(peer, is_sut, true)) continue;
          if (peer.service != cand.service) continue;
          if (!peer.cpu_millicores.has(t) || !peer.mem_bytes.has(t)) continue;
          const double spare_cpu = static_cast<double>(peer.limits.cpu_limit_millicores) -
                                   peer.cpu_millicores.values[t];
          const double spare_mem =
              static_cast<double>(peer.limits.mem_limit_bytes) - peer.mem_bytes.values[t];
          if (spare_cpu >= used_cpu && spare_mem >= used_mem) absorbable = true;
        }
        if (!absorbable) continue;
      }
      if (cand.watts.has(t)) second += cand.watts.values[t];
    }
    total += second;
  }
  return total;
}

}  // namespace wattbench::ref
