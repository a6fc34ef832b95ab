#include "wattbench/core/types.hpp"

#include <algorithm>
#include <cmath>

#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"

namespace wattbench {

const char* layer_name(Layer l) {
  switch (l) {
    case Layer::application: return "application";
    case Layer::service: return "service";
    case Layer::platform: return "platform";
    case Layer::isolation: return "isolation";
    case Layer::physical: return "physical";
  }
  return "service";
}

Layer layer_from_name(const std::string& s) {
  if (s == "application") return Layer::application;
  if (s == "service") return Layer::service;
  if (s == "platform") return Layer::platform;
  if (s == "isolation") return Layer::isolation;
  if (s == "physical") return Layer::physical;
  throw ConfigError("unknown layer '" + s + "'");
}

const char* sample_kind_name(SampleKind k) {
  switch (k) {
    case SampleKind::cpu_millicores: return "cpu_millicores";
    case SampleKind::cpu_fraction: return "cpu_fraction";
    case SampleKind::mem_bytes: return "mem_bytes";
    case SampleKind::watts: return "watts";
    case SampleKind::request_count: return "request_count";
    case SampleKind::custom: return "custom";
  }
  return "custom";
}

SampleKind sample_kind_from_name(const std::string& s) {
  if (s == "cpu_millicores") return SampleKind::cpu_millicores;
  if (s == "cpu_fraction") return SampleKind::cpu_fraction;
  if (s == "mem_bytes") return SampleKind::mem_bytes;
  if (s == "watts") return SampleKind::watts;
  if (s == "request_count") return SampleKind::request_count;
  if (s == "custom") return SampleKind::custom;
  throw ConfigError("unknown sample kind '" + s + "'");
}

const char* workload_shape_name(WorkloadShape s) {
  switch (s) {
    case WorkloadShape::shaped: return "shaped";
    case WorkloadShape::fixed: return "fixed";
    case WorkloadShape::pausing: return "pausing";
    case WorkloadShape::stress: return "stress";
  }
  return "fixed";
}

WorkloadShape workload_shape_from_name(const std::string& s) {
  if (s == "shaped") return WorkloadShape::shaped;
  if (s == "fixed") return WorkloadShape::fixed;
  if (s == "pausing") return WorkloadShape::pausing;
  if (s == "stress") return WorkloadShape::stress;
  throw ConfigError("unknown workload shape '" + s + "'");
}

const char* collector_backend_name(CollectorBackend b) {
  switch (b) {
    case CollectorBackend::tsdb_http: return "tsdb_http";
    case CollectorBackend::cluster_metrics: return "cluster_metrics";
    case CollectorBackend::power_meter: return "power_meter";
    case CollectorBackend::trace_replay: return "trace_replay";
    case CollectorBackend::simulator: return "simulator";
  }
  return "simulator";
}

CollectorBackend collector_backend_from_name(const std::string& s) {
  if (s == "tsdb_http") return CollectorBackend::tsdb_http;
  if (s == "cluster_metrics") return CollectorBackend::cluster_metrics;
  if (s == "power_meter") return CollectorBackend::power_meter;
  if (s == "trace_replay") return CollectorBackend::trace_replay;
  if (s == "simulator") return CollectorBackend::simulator;
  throw ConfigError("unknown collector backend '" + s + "'");
}

void validate_sample(const MeasurementSample& s) {
  if (!std::isfinite(s.value))
    throw DataError("sample value not finite (source " + s.source + ")");
  if (s.kind == SampleKind::cpu_fraction && (s.value < 0 || s.value > 1))
    throw DataError("cpu_fraction outside [0,1]: " + fmt_shortest(s.value));
  if (s.kind == SampleKind::watts && s.value < 0)
    throw DataError("negative watts: " + fmt_shortest(s.value));
  if (s.kind == SampleKind::mem_bytes && s.value < 0)
    throw DataError("negative mem_bytes: " + fmt_shortest(s.value));
}

bool FaultInjection::enabled_for(int attempt) const {
  if (drop_seconds_fraction <= 0) return false;
  if (attempts.empty()) return true;
  return std::find(attempts.begin(), attempts.end(), attempt) != attempts.end();
}

std::vector<std::string> default_platform_prefixes() {
  return {"kube-system", "monitoring", "observability", "knative-", "istio-", "platform"};
}

}  // namespace wattbench
