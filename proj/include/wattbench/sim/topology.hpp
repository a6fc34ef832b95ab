#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wattbench/core/types.hpp"

namespace wattbench {

/// One machine in the simulated cluster. Power follows the usual linear
/// model: p_idle when nothing runs, p_max at full CPU.
struct SimNode {
  std::string id;
  std::int64_t cpu_capacity_millicores = 0;
  std::int64_t mem_capacity_bytes = 0;
  double p_idle = 0;
  double p_max = 0;

  bool operator==(const SimNode&) const = default;
};

enum class SimServiceKind { pod, function };

const char* sim_service_kind_name(SimServiceKind k);
SimServiceKind sim_service_kind_from_name(const std::string& s);

/// Scaling policy for one service. A resize is applied only after the
/// demand signal has pointed the same way for the whole delay; min/max
/// replica bounds live in the service's ResourceSpec.
struct AutoscalerSpec {
  double target_cpu_fraction = 0.5;
  double scale_up_delay = 0;    // seconds
  double scale_down_delay = 0;  // seconds

  bool operator==(const AutoscalerSpec&) const = default;
};

/// One deployable service. A replica with cpu limit L millicores spends up
/// to L milliseconds of CPU per wall second, so it serves
/// L / per_request_cpu_ms requests per second.
struct SimService {
  std::string name;
  SimServiceKind kind = SimServiceKind::pod;
  double per_request_cpu_ms = 0;
  std::int64_t mem_floor_bytes = 0;  // resident memory at zero load
  double service_time = 0;           // seconds per request, unqueued
  double cold_start = 0;             // seconds; functions only
  ResourceSpec replica;              // limits and replica bounds
  AutoscalerSpec autoscaler;
  std::vector<std::string> placement;  // node ids; empty = every node

  bool operator==(const SimService&) const = default;
};

struct Topology {
  std::vector<SimNode> nodes;
  std::vector<SimService> services;
  std::map<std::string, std::string> routes;  // request path -> service name

  bool operator==(const Topology&) const = default;
};

/// Parse and validate a topology from YAML text. Throws ConfigError with the
/// offending key-path on violation.
Topology parse_topology(const std::string& text);

Topology load_topology(const std::string& path);

/// Re-check topology invariants on an already-built value (used after
/// patching). Throws ConfigError.
void validate_topology(const Topology& topo);

/// Replace the replica spec of each named service. Unknown names are a
/// ConfigError; the result should be re-validated.
void apply_resource_specs(Topology& topo, const std::map<std::string, ResourceSpec>& specs);

/// Billing map for the metrics layer: service name -> "pod" | "function".
std::map<std::string, std::string> service_kinds(const Topology& topo);

}  // namespace wattbench
