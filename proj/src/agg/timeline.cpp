#include "wattbench/agg/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "wattbench/agg/clean.hpp"

namespace wattbench {

const char* lifecycle_event_name(LifecycleEventKind k) {
  switch (k) {
    case LifecycleEventKind::created:
      return "created";
    case LifecycleEventKind::ready:
      return "ready";
    case LifecycleEventKind::terminated:
      return "terminated";
  }
  return "?";
}

namespace {

struct Group {
  std::string replica;
  std::string service;
  std::string node;
  Layer layer = Layer::service;
  std::vector<MeasurementSample> cpu_mc;
  std::vector<MeasurementSample> cpu_frac;
  std::vector<MeasurementSample> mem;
  std::vector<MeasurementSample> watts;
  double first_ts = 0, last_ts = 0;
  bool any = false;
};

}  // namespace

std::vector<ResourceTimeline> build_timelines(const std::vector<MeasurementSample>& samples,
                                              const TimelineConfig& config, TimelineStats* stats) {
  const int n = static_cast<int>(std::floor(config.t1 - config.t0));
  TimelineStats local;

  std::map<std::pair<std::string, std::string>, Group> groups;  // (pod, node) -> group
  for (const auto& s : samples) {
    if (s.ts < config.t0 || s.ts >= config.t1) continue;
    if (s.unattributed) local.unattributed_samples++;
    if (s.kind == SampleKind::request_count || s.kind == SampleKind::custom) continue;
    // Node-level series group under the node alone; per-pod under the pod id.
    const auto key = s.pod.empty() ? std::make_pair(std::string(), s.node)
                                   : std::make_pair(s.pod, std::string());
    auto& g = groups[key];
    if (!g.any) {
      g.replica = s.pod;
      g.node = s.node;
      g.service = s.service;
      g.layer = s.layer;
      g.first_ts = g.last_ts = s.ts;
      g.any = true;
    } else {
      g.first_ts = std::min(g.first_ts, s.ts);
      g.last_ts = std::max(g.last_ts, s.ts);
      if (g.node.empty()) g.node = s.node;
      if (g.service.empty()) g.service = s.service;
    }
    switch (s.kind) {
      case SampleKind::cpu_millicores:
        g.cpu_mc.push_back(s);
        break;
      case SampleKind::cpu_fraction:
        g.cpu_frac.push_back(s);
        break;
      case SampleKind::mem_bytes:
        g.mem.push_back(s);
        break;
      case SampleKind::watts:
        g.watts.push_back(s);
        break;
      default:
        break;
    }
  }

  std::vector<ResourceTimeline> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) {
    ResourceTimeline tl;
    tl.replica = g.replica;
    tl.service = g.service;
    tl.node = g.node;
    tl.layer = g.layer;
    tl.grid_start = config.t0;

    auto limit_it = config.limits_by_service.find(g.service);
    if (limit_it != config.limits_by_service.end()) tl.limits = limit_it->second;

    auto finish = [&](std::vector<MeasurementSample> raw) {
      auto series = resample_gauge(std::move(raw), config.t0, n, config.cleaning.max_gap_fill);
      auto cleaned = clean(series, config.cleaning);
      local.outliers_removed += cleaned.removed;
      return cleaned.series;
    };

    if (!g.cpu_mc.empty()) {
      tl.cpu_millicores = finish(std::move(g.cpu_mc));
    } else if (!g.cpu_frac.empty() && tl.limits.cpu_limit_millicores > 0) {
      tl.cpu_millicores = finish(std::move(g.cpu_frac));
      for (size_t i = 0; i < tl.cpu_millicores.size(); i++)
        if (tl.cpu_millicores.has(i))
          tl.cpu_millicores.values[i] *= static_cast<double>(tl.limits.cpu_limit_millicores);
    } else {
      tl.cpu_millicores = make_missing_series(config.t0, n);
    }
    tl.mem_bytes = g.mem.empty() ? make_missing_series(config.t0, n) : finish(std::move(g.mem));
    tl.watts = g.watts.empty() ? make_missing_series(config.t0, n) : finish(std::move(g.watts));

    tl.lifecycle.push_back({LifecycleEventKind::created, g.first_ts});
    tl.lifecycle.push_back({LifecycleEventKind::ready, g.first_ts});
    // Only call a replica terminated when it went silent well before the
    // window end; otherwise it simply outlived the observation window.
    if (g.last_ts + config.cleaning.max_gap_fill + 1 < config.t1)
      tl.lifecycle.push_back({LifecycleEventKind::terminated, g.last_ts});

    out.push_back(std::move(tl));
  }

  std::sort(out.begin(), out.end(), [](const ResourceTimeline& a, const ResourceTimeline& b) {
    return std::tie(a.layer, a.service, a.replica, a.node) <
           std::tie(b.layer, b.service, b.replica, b.node);
  });
  if (stats) *stats = local;
  return out;
}

}  // namespace wattbench
