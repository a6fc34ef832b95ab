#include "wattbench/sim/topology.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "wattbench/core/error.hpp"
#include "wattbench/core/units.hpp"

namespace wattbench {

const char* sim_service_kind_name(SimServiceKind k) {
  switch (k) {
    case SimServiceKind::pod: return "pod";
    case SimServiceKind::function: return "function";
  }
  return "pod";
}

SimServiceKind sim_service_kind_from_name(const std::string& s) {
  if (s == "pod") return SimServiceKind::pod;
  if (s == "function") return SimServiceKind::function;
  throw ConfigError("unknown service kind '" + s + "'");
}

namespace {

std::string sub(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string subi(const std::string& base, const std::string& key, size_t i) {
  return sub(base, key) + "[" + std::to_string(i) + "]";
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void expect_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) fail(path, "expected a mapping");
}

void check_keys(const YAML::Node& n, const std::string& path,
                const std::set<std::string>& allowed) {
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(sub(path, key), "unknown key");
  }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(path, "expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(path, "bad value '" + n.Scalar() + "'");
  }
}

template <typename T>
T get(const YAML::Node& n, const std::string& key, const std::string& path) {
  if (!n[key]) fail(sub(path, key), "missing required key");
  return scalar<T>(n[key], sub(path, key));
}

template <typename T>
T get_or(const YAML::Node& n, const std::string& key, const std::string& path, T def) {
  if (!n[key]) return def;
  return scalar<T>(n[key], sub(path, key));
}

SimNode parse_node(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"id", "cpu", "mem", "idle_watts", "max_watts"});
  SimNode node;
  node.id = get<std::string>(n, "id", path);
  try {
    node.cpu_capacity_millicores = parse_cpu_quantity(get<std::string>(n, "cpu", path));
  } catch (const ConfigError& e) {
    fail(sub(path, "cpu"), e.what());
  }
  try {
    node.mem_capacity_bytes = parse_mem_quantity(get<std::string>(n, "mem", path));
  } catch (const ConfigError& e) {
    fail(sub(path, "mem"), e.what());
  }
  node.p_idle = get<double>(n, "idle_watts", path);
  node.p_max = get<double>(n, "max_watts", path);
  return node;
}

ResourceSpec parse_replica_spec(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"cpu", "mem", "replicas_min", "replicas_max"});
  ResourceSpec spec;
  try {
    spec.cpu_limit_millicores = parse_cpu_quantity(get<std::string>(n, "cpu", path));
  } catch (const ConfigError& e) {
    fail(sub(path, "cpu"), e.what());
  }
  try {
    spec.mem_limit_bytes = parse_mem_quantity(get<std::string>(n, "mem", path));
  } catch (const ConfigError& e) {
    fail(sub(path, "mem"), e.what());
  }
  spec.replicas_min = get_or<int>(n, "replicas_min", path, 1);
  spec.replicas_max = get_or<int>(n, "replicas_max", path, spec.replicas_min);
  return spec;
}

AutoscalerSpec parse_autoscaler(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"target_cpu_fraction", "scale_up_delay", "scale_down_delay"});
  AutoscalerSpec a;
  a.target_cpu_fraction = get_or<double>(n, "target_cpu_fraction", path, 0.5);
  a.scale_up_delay = get_or<double>(n, "scale_up_delay", path, 0.0);
  a.scale_down_delay = get_or<double>(n, "scale_down_delay", path, 0.0);
  return a;
}

SimService parse_service(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path,
             {"name", "kind", "per_request_cpu_ms", "mem_floor", "service_time", "cold_start",
              "replica", "autoscaler", "placement"});
  SimService svc;
  svc.name = get<std::string>(n, "name", path);
  try {
    svc.kind = sim_service_kind_from_name(get_or<std::string>(n, "kind", path, "pod"));
  } catch (const ConfigError& e) {
    fail(sub(path, "kind"), e.what());
  }
  svc.per_request_cpu_ms = get<double>(n, "per_request_cpu_ms", path);
  if (n["mem_floor"]) {
    try {
      svc.mem_floor_bytes = parse_mem_quantity(get<std::string>(n, "mem_floor", path));
    } catch (const ConfigError& e) {
      fail(sub(path, "mem_floor"), e.what());
    }
  }
  svc.service_time = get<double>(n, "service_time", path);
  svc.cold_start = get_or<double>(n, "cold_start", path, 0.0);
  if (!n["replica"]) fail(sub(path, "replica"), "missing required key");
  svc.replica = parse_replica_spec(n["replica"], sub(path, "replica"));
  if (n["autoscaler"]) svc.autoscaler = parse_autoscaler(n["autoscaler"], sub(path, "autoscaler"));
  if (n["placement"]) {
    const auto& p = n["placement"];
    if (!p.IsSequence()) fail(sub(path, "placement"), "expected a list");
    for (size_t i = 0; i < p.size(); i++)
      svc.placement.push_back(scalar<std::string>(p[i], subi(path, "placement", i)));
  }
  return svc;
}

}  // namespace

Topology parse_topology(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("topology: ") + e.what());
  }
  expect_map(root, "topology");
  check_keys(root, "", {"nodes", "services", "routes"});

  Topology topo;
  const auto& nodes = root["nodes"];
  if (!nodes || !nodes.IsSequence()) fail("nodes", "expected a list");
  for (size_t i = 0; i < nodes.size(); i++)
    topo.nodes.push_back(parse_node(nodes[i], "nodes[" + std::to_string(i) + "]"));

  const auto& services = root["services"];
  if (!services || !services.IsSequence()) fail("services", "expected a list");
  for (size_t i = 0; i < services.size(); i++)
    topo.services.push_back(parse_service(services[i], "services[" + std::to_string(i) + "]"));

  const auto& routes = root["routes"];
  if (!routes || !routes.IsMap()) fail("routes", "expected a mapping");
  for (const auto& kv : routes) {
    const auto path = kv.first.as<std::string>();
    topo.routes[path] = scalar<std::string>(kv.second, sub("routes", path));
  }

  validate_topology(topo);
  return topo;
}

Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open topology file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_topology(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void validate_topology(const Topology& topo) {
  if (topo.nodes.empty()) fail("nodes", "at least one node required");
  std::set<std::string> node_ids;
  for (size_t i = 0; i < topo.nodes.size(); i++) {
    const auto& n = topo.nodes[i];
    const auto path = "nodes[" + std::to_string(i) + "]";
    if (n.id.empty()) fail(sub(path, "id"), "must not be empty");
    if (!node_ids.insert(n.id).second) fail(sub(path, "id"), "duplicate node id '" + n.id + "'");
    if (n.cpu_capacity_millicores <= 0) fail(sub(path, "cpu"), "must be positive");
    if (n.mem_capacity_bytes <= 0) fail(sub(path, "mem"), "must be positive");
    if (n.p_idle < 0) fail(sub(path, "idle_watts"), "must be >= 0");
    if (n.p_max < n.p_idle) fail(sub(path, "max_watts"), "must be >= idle_watts");
  }

  if (topo.services.empty()) fail("services", "at least one service required");
  std::set<std::string> names;
  for (size_t i = 0; i < topo.services.size(); i++) {
    const auto& s = topo.services[i];
    const auto path = "services[" + std::to_string(i) + "]";
    if (s.name.empty()) fail(sub(path, "name"), "must not be empty");
    if (!names.insert(s.name).second) fail(sub(path, "name"), "duplicate service '" + s.name + "'");
    if (s.per_request_cpu_ms <= 0) fail(sub(path, "per_request_cpu_ms"), "must be positive");
    if (s.service_time <= 0) fail(sub(path, "service_time"), "must be positive");
    if (s.mem_floor_bytes < 0) fail(sub(path, "mem_floor"), "must be >= 0");
    if (s.cold_start < 0) fail(sub(path, "cold_start"), "must be >= 0");
    if (s.kind == SimServiceKind::pod && s.cold_start > 0)
      fail(sub(path, "cold_start"), "only functions take a cold start");
    if (s.replica.cpu_limit_millicores <= 0) fail(sub(path, "replica.cpu"), "must be positive");
    if (s.replica.mem_limit_bytes <= 0) fail(sub(path, "replica.mem"), "must be positive");
    if (s.mem_floor_bytes > s.replica.mem_limit_bytes)
      fail(sub(path, "mem_floor"), "exceeds the replica memory limit");
    const int min_allowed = s.kind == SimServiceKind::function ? 0 : 1;
    if (s.replica.replicas_min < min_allowed)
      fail(sub(path, "replica.replicas_min"), "must be >= " + std::to_string(min_allowed));
    if (s.replica.replicas_max < std::max(1, s.replica.replicas_min))
      fail(sub(path, "replica.replicas_max"), "must be >= replicas_min and >= 1");
    const auto& a = s.autoscaler;
    if (!(a.target_cpu_fraction > 0) || a.target_cpu_fraction > 1)
      fail(sub(path, "autoscaler.target_cpu_fraction"), "must be in (0, 1]");
    if (a.scale_up_delay < 0) fail(sub(path, "autoscaler.scale_up_delay"), "must be >= 0");
    if (a.scale_down_delay < 0) fail(sub(path, "autoscaler.scale_down_delay"), "must be >= 0");
    for (size_t j = 0; j < s.placement.size(); j++) {
      if (!node_ids.count(s.placement[j]))
        fail(subi(path, "placement", j), "unknown node '" + s.placement[j] + "'");
    }
  }

  if (topo.routes.empty()) fail("routes", "at least one route required");
  for (const auto& [path, service] : topo.routes) {
    if (path.empty() || path[0] != '/') fail(sub("routes", path), "path must start with '/'");
    if (!names.count(service)) fail(sub("routes", path), "unknown service '" + service + "'");
  }
}

void apply_resource_specs(Topology& topo, const std::map<std::string, ResourceSpec>& specs) {
  for (const auto& [name, spec] : specs) {
    bool found = false;
    for (auto& s : topo.services) {
      if (s.name == name) {
        s.replica = spec;
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("resource spec for unknown service '" + name + "'");
  }
}

std::map<std::string, std::string> service_kinds(const Topology& topo) {
  std::map<std::string, std::string> kinds;
  for (const auto& s : topo.services) kinds[s.name] = sim_service_kind_name(s.kind);
  return kinds;
}

}  // namespace wattbench
