#include "wattbench/core/plan.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"
#include "wattbench/core/units.hpp"

namespace wattbench {

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

std::vector<std::string> string_list(const YAML::Node& n, const std::string& path) {
  if (n.IsNull()) return {};
  if (!n.IsSequence()) fail(path, "expected a list");
  std::vector<std::string> out;
  for (size_t i = 0; i < n.size(); i++)
    out.push_back(scalar<std::string>(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

ResourceSpec parse_resource_spec(const YAML::Node& n, const std::string& path) {
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

WorkloadSpec parse_workload(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path,
             {"name", "shape", "duration", "peak_users", "fixed_request_count", "seed",
              "think_time", "pausing_users", "shaped_floor_fraction"});
  WorkloadSpec w;
  w.shape = workload_shape_from_name(get<std::string>(n, "shape", path));
  w.name = get_or<std::string>(n, "name", path, workload_shape_name(w.shape));
  w.duration_s = get<std::int64_t>(n, "duration", path);
  w.peak_users = get_or<int>(n, "peak_users", path, 1);
  if (n["fixed_request_count"])
    w.fixed_request_count = scalar<std::int64_t>(n["fixed_request_count"],
                                                 sub(path, "fixed_request_count"));
  w.seed = get_or<std::uint64_t>(n, "seed", path, 0);
  w.think_time = get_or<double>(n, "think_time", path, 1.0);
  w.pausing_users = get_or<int>(n, "pausing_users", path, 25);
  w.shaped_floor_fraction = get_or<double>(n, "shaped_floor_fraction", path, 0.05);
  return w;
}

std::vector<WorkloadSpec> parse_workload_list(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) fail(path, "expected a list");
  std::vector<WorkloadSpec> out;
  for (size_t i = 0; i < n.size(); i++)
    out.push_back(parse_workload(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

VariantSpec parse_variant(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"name", "source", "descriptor", "resources", "patches", "workloads"});
  VariantSpec v;
  v.name = get<std::string>(n, "name", path);
  v.source = get<std::string>(n, "source", path);
  v.deployment_descriptor = get<std::string>(n, "descriptor", path);
  if (n["resources"]) {
    const auto rp = sub(path, "resources");
    expect_map(n["resources"], rp);
    for (const auto& kv : n["resources"]) {
      const auto svc = kv.first.as<std::string>();
      v.resource_specs[svc] = parse_resource_spec(kv.second, sub(rp, svc));
    }
  }
  if (n["patches"]) {
    const auto pp = sub(path, "patches");
    if (!n["patches"].IsSequence()) fail(pp, "expected a list");
    for (size_t i = 0; i < n["patches"].size(); i++) {
      const auto ip = pp + "[" + std::to_string(i) + "]";
      const auto& pn = n["patches"][i];
      expect_map(pn, ip);
      check_keys(pn, ip, {"path", "value"});
      v.patches.push_back({get<std::string>(pn, "path", ip), get<std::string>(pn, "value", ip)});
    }
  }
  if (n["workloads"]) v.workload_overrides = parse_workload_list(n["workloads"], sub(path, "workloads"));
  return v;
}

QuerySpec parse_query(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"query", "layer", "kind", "scale", "counter", "unit"});
  QuerySpec q;
  q.query = get<std::string>(n, "query", path);
  q.layer = layer_from_name(get<std::string>(n, "layer", path));
  q.kind = sample_kind_from_name(get<std::string>(n, "kind", path));
  q.scale = get_or<double>(n, "scale", path, 1.0);
  q.counter = get_or<bool>(n, "counter", path, false);
  q.unit = get_or<std::string>(n, "unit", path, "");
  return q;
}

CollectorConfig parse_collector(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"id", "backend", "endpoint", "queries", "poll_interval", "mandatory", "inject"});
  CollectorConfig c;
  c.id = get<std::string>(n, "id", path);
  c.backend = collector_backend_from_name(get<std::string>(n, "backend", path));
  c.endpoint = get_or<std::string>(n, "endpoint", path, "");
  c.poll_interval = get_or<double>(n, "poll_interval", path, 5.0);
  c.mandatory = get_or<bool>(n, "mandatory", path, false);
  if (n["queries"]) {
    const auto qp = sub(path, "queries");
    if (!n["queries"].IsSequence()) fail(qp, "expected a list");
    for (size_t i = 0; i < n["queries"].size(); i++)
      c.queries.push_back(parse_query(n["queries"][i], qp + "[" + std::to_string(i) + "]"));
  }
  if (n["inject"]) {
    const auto ip = sub(path, "inject");
    expect_map(n["inject"], ip);
    check_keys(n["inject"], ip, {"drop_seconds_fraction", "seed", "attempts"});
    c.inject.drop_seconds_fraction =
        get_or<double>(n["inject"], "drop_seconds_fraction", ip, 0.0);
    c.inject.seed = get_or<std::uint64_t>(n["inject"], "seed", ip, 0);
    if (n["inject"]["attempts"]) {
      const auto& an = n["inject"]["attempts"];
      if (!an.IsSequence()) fail(sub(ip, "attempts"), "expected a list");
      for (size_t i = 0; i < an.size(); i++)
        c.inject.attempts.push_back(scalar<int>(an[i], subi(ip, "attempts", i)));
    }
  }
  return c;
}

void check_workloads(const std::vector<WorkloadSpec>& ws, const std::string& path) {
  std::set<std::string> names;
  for (size_t i = 0; i < ws.size(); i++) {
    const auto wp = path + "[" + std::to_string(i) + "]";
    const auto& w = ws[i];
    if (w.name.empty()) fail(sub(wp, "name"), "must be non-empty");
    if (!names.insert(w.name).second) fail(sub(wp, "name"), "duplicate workload name '" + w.name + "'");
    if (w.duration_s <= 0) fail(sub(wp, "duration"), "must satisfy duration > 0");
    if (w.peak_users < 1) fail(sub(wp, "peak_users"), "must satisfy peak_users >= 1");
    if ((w.shape == WorkloadShape::fixed) != w.fixed_request_count.has_value())
      fail(sub(wp, "fixed_request_count"), "required iff shape = fixed");
    if (w.fixed_request_count && *w.fixed_request_count < 1)
      fail(sub(wp, "fixed_request_count"), "must satisfy fixed_request_count >= 1");
    if (w.think_time < 0) fail(sub(wp, "think_time"), "must satisfy think_time >= 0");
    if (w.pausing_users < 1) fail(sub(wp, "pausing_users"), "must satisfy pausing_users >= 1");
    if (w.shaped_floor_fraction < 0 || w.shaped_floor_fraction > 1)
      fail(sub(wp, "shaped_floor_fraction"), "must lie in [0,1]");
  }
}

}  // namespace

void validate_plan(const ExperimentPlan& p) {
  if (p.repetitions < 1) fail("repetitions", "must satisfy repetitions >= 1");
  if (p.settle < 0) fail("settle", "must satisfy settle >= 0");
  if (p.inter_run_settle < 0) fail("inter_run_settle", "must satisfy inter_run_settle >= 0");
  if (p.max_attempts < 1) fail("max_attempts", "must satisfy max_attempts >= 1");
  if (p.coverage_threshold < 0 || p.coverage_threshold > 1)
    fail("coverage_threshold", "must lie in [0,1]");
  if (p.trim_head < 0) fail("trim_head", "must satisfy trim_head >= 0");
  if (p.trim_tail < 0) fail("trim_tail", "must satisfy trim_tail >= 0");
  if (p.output_dir.empty()) fail("output_dir", "missing required key");
  if (p.variants.empty()) fail("variants", "at least one variant required");

  std::set<std::string> vnames;
  bool all_override = true;
  for (size_t i = 0; i < p.variants.size(); i++) {
    const auto vp = "variants[" + std::to_string(i) + "]";
    const auto& v = p.variants[i];
    if (v.name.empty()) fail(sub(vp, "name"), "must be non-empty");
    if (!vnames.insert(v.name).second)
      fail(sub(vp, "name"), "duplicate variant name '" + v.name + "'");
    if (v.source.empty()) fail(sub(vp, "source"), "must be non-empty");
    if (v.deployment_descriptor.empty()) fail(sub(vp, "descriptor"), "must be non-empty");
    for (const auto& [svc, spec] : v.resource_specs) {
      const auto rp = sub(vp, "resources." + svc);
      if (spec.cpu_limit_millicores <= 0) fail(sub(rp, "cpu"), "limit must be > 0");
      if (spec.mem_limit_bytes <= 0) fail(sub(rp, "mem"), "limit must be > 0");
      if (spec.replicas_min < 1) fail(sub(rp, "replicas_min"), "must satisfy replicas_min >= 1");
      if (spec.replicas_max < spec.replicas_min)
        fail(sub(rp, "replicas_max"), "must satisfy replicas_max >= replicas_min");
    }
    if (v.workload_overrides.empty())
      all_override = false;
    else
      check_workloads(v.workload_overrides, sub(vp, "workloads"));
  }
  if (p.workloads.empty() && !all_override)
    fail("workloads", "at least one workload required (or per-variant overrides everywhere)");
  check_workloads(p.workloads, "workloads");

  std::set<std::string> cids;
  for (size_t i = 0; i < p.collectors.size(); i++) {
    const auto cp = "collectors[" + std::to_string(i) + "]";
    const auto& c = p.collectors[i];
    if (c.id.empty()) fail(sub(cp, "id"), "must be non-empty");
    if (!cids.insert(c.id).second) fail(sub(cp, "id"), "duplicate collector id '" + c.id + "'");
    if (c.poll_interval < 1 || c.poll_interval > 60)
      fail(sub(cp, "poll_interval"), "must lie in [1,60]");
    if (c.inject.drop_seconds_fraction < 0 || c.inject.drop_seconds_fraction > 1)
      fail(sub(cp, "inject.drop_seconds_fraction"), "must lie in [0,1]");
  }

  if (p.cost_book.pod_cpu_price < 0 || p.cost_book.pod_mem_price < 0 ||
      p.cost_book.fn_invocation_price < 0 || p.cost_book.fn_gbs_price < 0)
    fail("cost_book", "prices must be >= 0");
  if (p.aux_model.pue < 1) fail("aux_model.pue", "must satisfy pue >= 1");
  if (p.aux_model.network_j_per_gb < 0 || p.aux_model.storage_j_per_gb_s < 0)
    fail("aux_model", "energy factors must be >= 0");
  if (p.overprovision.cpu_threshold <= 0 || p.overprovision.cpu_threshold >= 1)
    fail("overprovision.cpu_threshold", "must lie in (0,1)");
  if (p.overprovision.mem_threshold <= 0 || p.overprovision.mem_threshold >= 1)
    fail("overprovision.mem_threshold", "must lie in (0,1)");
  if (p.cleaning.mad_k <= 0) fail("cleaning.mad_k", "must satisfy mad_k > 0");
  if (p.cleaning.max_gap_fill < 0) fail("cleaning.max_gap_fill", "must be >= 0");
}

ExperimentPlan parse_plan(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("plan is not well-formed YAML: ") + e.what());
  }
  expect_map(root, "(root)");
  check_keys(root, "",
             {"output_dir", "repetitions", "settle", "inter_run_settle", "teardown_between_runs",
              "max_attempts", "coverage_threshold", "scenario", "workload_placement", "trim_head",
              "trim_tail", "platform_prefixes", "sut_services", "variants", "workloads",
              "collectors", "cost_book", "aux_model", "overprovision", "cleaning"});

  ExperimentPlan p;
  p.output_dir = get_or<std::string>(root, "output_dir", "", "");
  p.repetitions = get_or<int>(root, "repetitions", "", 1);
  p.settle = get_or<double>(root, "settle", "", 60.0);
  p.inter_run_settle = get_or<double>(root, "inter_run_settle", "", 120.0);
  p.teardown_between_runs = get_or<bool>(root, "teardown_between_runs", "", true);
  p.max_attempts = get_or<int>(root, "max_attempts", "", 3);
  p.coverage_threshold = get_or<double>(root, "coverage_threshold", "", 0.9);
  p.scenario_path = get_or<std::string>(root, "scenario", "", "");
  p.trim_head = get_or<double>(root, "trim_head", "", 0.0);
  p.trim_tail = get_or<double>(root, "trim_tail", "", 0.0);
  const auto placement = get_or<std::string>(root, "workload_placement", "", "local");
  if (placement == "local")
    p.workload_placement = WorkloadPlacement::local;
  else if (placement == "cluster")
    p.workload_placement = WorkloadPlacement::cluster;
  else
    fail("workload_placement", "must be local or cluster");

  p.platform_prefixes = root["platform_prefixes"]
                            ? string_list(root["platform_prefixes"], "platform_prefixes")
                            : default_platform_prefixes();
  if (root["sut_services"]) p.sut_services = string_list(root["sut_services"], "sut_services");

  if (root["variants"]) {
    if (!root["variants"].IsSequence()) fail("variants", "expected a list");
    for (size_t i = 0; i < root["variants"].size(); i++)
      p.variants.push_back(parse_variant(root["variants"][i], "variants[" + std::to_string(i) + "]"));
  }
  if (root["workloads"]) p.workloads = parse_workload_list(root["workloads"], "workloads");
  if (root["collectors"]) {
    if (!root["collectors"].IsSequence()) fail("collectors", "expected a list");
    for (size_t i = 0; i < root["collectors"].size(); i++)
      p.collectors.push_back(
          parse_collector(root["collectors"][i], "collectors[" + std::to_string(i) + "]"));
  }

  if (root["cost_book"]) {
    const auto& n = root["cost_book"];
    expect_map(n, "cost_book");
    check_keys(n, "cost_book",
               {"pod_cpu_price", "pod_mem_price", "fn_invocation_price", "fn_gbs_price", "currency"});
    p.cost_book.pod_cpu_price = get_or<double>(n, "pod_cpu_price", "cost_book", 0.0);
    p.cost_book.pod_mem_price = get_or<double>(n, "pod_mem_price", "cost_book", 0.0);
    p.cost_book.fn_invocation_price = get_or<double>(n, "fn_invocation_price", "cost_book", 0.0);
    p.cost_book.fn_gbs_price = get_or<double>(n, "fn_gbs_price", "cost_book", 0.0);
    p.cost_book.currency = get_or<std::string>(n, "currency", "cost_book", "USD");
  }
  if (root["aux_model"]) {
    const auto& n = root["aux_model"];
    expect_map(n, "aux_model");
    check_keys(n, "aux_model", {"pue", "network_j_per_gb", "storage_j_per_gb_s"});
    p.aux_model.pue = get_or<double>(n, "pue", "aux_model", 1.0);
    p.aux_model.network_j_per_gb = get_or<double>(n, "network_j_per_gb", "aux_model", 0.0);
    p.aux_model.storage_j_per_gb_s = get_or<double>(n, "storage_j_per_gb_s", "aux_model", 0.0);
  }
  if (root["overprovision"]) {
    const auto& n = root["overprovision"];
    expect_map(n, "overprovision");
    check_keys(n, "overprovision", {"cpu_threshold", "mem_threshold", "require_peer_headroom"});
    p.overprovision.cpu_threshold = get_or<double>(n, "cpu_threshold", "overprovision", 0.49);
    p.overprovision.mem_threshold = get_or<double>(n, "mem_threshold", "overprovision", 0.49);
    p.overprovision.require_peer_headroom =
        get_or<bool>(n, "require_peer_headroom", "overprovision", true);
  }
  if (root["cleaning"]) {
    const auto& n = root["cleaning"];
    expect_map(n, "cleaning");
    check_keys(n, "cleaning", {"method", "mad_k", "max_gap_fill"});
    const auto method = get_or<std::string>(n, "method", "cleaning", "mad");
    if (method == "mad")
      p.cleaning.method = CleaningConfig::Method::mad;
    else if (method == "none")
      p.cleaning.method = CleaningConfig::Method::none;
    else
      fail("cleaning.method", "must be mad or none");
    p.cleaning.mad_k = get_or<double>(n, "mad_k", "cleaning", 5.0);
    p.cleaning.max_gap_fill = get_or<int>(n, "max_gap_fill", "cleaning", 3);
  }

  validate_plan(p);
  return p;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read plan file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto plan = parse_plan(buf.str());

  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& s) {
    if (s.empty()) return;
    std::filesystem::path sp(s);
    if (sp.is_relative()) s = (base / sp).lexically_normal().string();
  };
  for (auto& v : plan.variants) resolve(v.deployment_descriptor);
  resolve(plan.scenario_path);
  for (auto& c : plan.collectors)
    if (c.backend == CollectorBackend::trace_replay) resolve(c.endpoint);
  return plan;
}

namespace {

bool plain_safe(const std::string& s) {
  if (s.empty()) return false;
  static const std::string extra = "._-/:";
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && extra.find(c) == std::string::npos)
      return false;
  const char f = s.front();
  if (!std::isalnum(static_cast<unsigned char>(f)) && f != '/' && f != '.' && f != '_') return false;
  if (s.back() == ':' || s.find(": ") != std::string::npos) return false;
  // Quote anything YAML would type-coerce.
  static const std::set<std::string> reserved = {"true", "false", "null", "yes", "no", "on", "off"};
  if (reserved.count(s)) return false;
  try {
    (void)parse_double(s);
    return false;
  } catch (const DataError&) {
  }
  return true;
}

std::string yscalar(const std::string& s) {
  if (plain_safe(s)) return s;
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  out += "'";
  return out;
}

void emit_workload(std::ostream& os, const WorkloadSpec& w, int indent) {
  const std::string pad(indent, ' ');
  os << pad << "- shape: " << workload_shape_name(w.shape) << "\n";
  os << pad << "  name: " << yscalar(w.name) << "\n";
  os << pad << "  duration: " << w.duration_s << "\n";
  os << pad << "  peak_users: " << w.peak_users << "\n";
  if (w.fixed_request_count) os << pad << "  fixed_request_count: " << *w.fixed_request_count << "\n";
  os << pad << "  seed: " << w.seed << "\n";
  os << pad << "  think_time: " << fmt_shortest(w.think_time) << "\n";
  os << pad << "  pausing_users: " << w.pausing_users << "\n";
  os << pad << "  shaped_floor_fraction: " << fmt_shortest(w.shaped_floor_fraction) << "\n";
}

}  // namespace

std::string render_plan(const ExperimentPlan& p) {
  std::ostringstream os;
  os << "output_dir: " << yscalar(p.output_dir) << "\n";
  os << "repetitions: " << p.repetitions << "\n";
  os << "settle: " << fmt_shortest(p.settle) << "\n";
  os << "inter_run_settle: " << fmt_shortest(p.inter_run_settle) << "\n";
  os << "teardown_between_runs: " << (p.teardown_between_runs ? "true" : "false") << "\n";
  os << "max_attempts: " << p.max_attempts << "\n";
  os << "coverage_threshold: " << fmt_shortest(p.coverage_threshold) << "\n";
  if (!p.scenario_path.empty()) os << "scenario: " << yscalar(p.scenario_path) << "\n";
  os << "workload_placement: "
     << (p.workload_placement == WorkloadPlacement::local ? "local" : "cluster") << "\n";
  os << "trim_head: " << fmt_shortest(p.trim_head) << "\n";
  os << "trim_tail: " << fmt_shortest(p.trim_tail) << "\n";
  if (p.platform_prefixes.empty()) {
    os << "platform_prefixes: []\n";
  } else {
    os << "platform_prefixes:\n";
    for (const auto& s : p.platform_prefixes) os << "  - " << yscalar(s) << "\n";
  }
  if (!p.sut_services.empty()) {
    os << "sut_services:\n";
    for (const auto& s : p.sut_services) os << "  - " << yscalar(s) << "\n";
  }

  os << "variants:\n";
  for (const auto& v : p.variants) {
    os << "  - name: " << yscalar(v.name) << "\n";
    os << "    source: " << yscalar(v.source) << "\n";
    os << "    descriptor: " << yscalar(v.deployment_descriptor) << "\n";
    if (!v.resource_specs.empty()) {
      os << "    resources:\n";
      for (const auto& [svc, spec] : v.resource_specs) {
        os << "      " << yscalar(svc) << ":\n";
        os << "        cpu: " << render_cpu_quantity(spec.cpu_limit_millicores) << "\n";
        os << "        mem: " << render_mem_quantity(spec.mem_limit_bytes) << "\n";
        os << "        replicas_min: " << spec.replicas_min << "\n";
        os << "        replicas_max: " << spec.replicas_max << "\n";
      }
    }
    if (!v.patches.empty()) {
      os << "    patches:\n";
      for (const auto& patch : v.patches) {
        os << "      - path: " << yscalar(patch.path) << "\n";
        os << "        value: " << yscalar(patch.value) << "\n";
      }
    }
    if (!v.workload_overrides.empty()) {
      os << "    workloads:\n";
      for (const auto& w : v.workload_overrides) emit_workload(os, w, 6);
    }
  }

  if (!p.workloads.empty()) {
    os << "workloads:\n";
    for (const auto& w : p.workloads) emit_workload(os, w, 2);
  }

  if (!p.collectors.empty()) {
    os << "collectors:\n";
    for (const auto& c : p.collectors) {
      os << "  - id: " << yscalar(c.id) << "\n";
      os << "    backend: " << collector_backend_name(c.backend) << "\n";
      if (!c.endpoint.empty()) os << "    endpoint: " << yscalar(c.endpoint) << "\n";
      os << "    poll_interval: " << fmt_shortest(c.poll_interval) << "\n";
      os << "    mandatory: " << (c.mandatory ? "true" : "false") << "\n";
      if (!(c.inject == FaultInjection{})) {
        os << "    inject:\n";
        os << "      drop_seconds_fraction: " << fmt_shortest(c.inject.drop_seconds_fraction) << "\n";
        os << "      seed: " << c.inject.seed << "\n";
        if (!c.inject.attempts.empty()) {
          os << "      attempts:";
          os << " [";
          for (size_t i = 0; i < c.inject.attempts.size(); i++)
            os << (i ? ", " : "") << c.inject.attempts[i];
          os << "]\n";
        }
      }
      if (!c.queries.empty()) {
        os << "    queries:\n";
        for (const auto& q : c.queries) {
          os << "      - query: " << yscalar(q.query) << "\n";
          os << "        layer: " << layer_name(q.layer) << "\n";
          os << "        kind: " << sample_kind_name(q.kind) << "\n";
          os << "        scale: " << fmt_shortest(q.scale) << "\n";
          os << "        counter: " << (q.counter ? "true" : "false") << "\n";
          if (!q.unit.empty()) os << "        unit: " << yscalar(q.unit) << "\n";
        }
      }
    }
  }

  os << "cost_book:\n";
  os << "  pod_cpu_price: " << fmt_shortest(p.cost_book.pod_cpu_price) << "\n";
  os << "  pod_mem_price: " << fmt_shortest(p.cost_book.pod_mem_price) << "\n";
  os << "  fn_invocation_price: " << fmt_shortest(p.cost_book.fn_invocation_price) << "\n";
  os << "  fn_gbs_price: " << fmt_shortest(p.cost_book.fn_gbs_price) << "\n";
  os << "  currency: " << yscalar(p.cost_book.currency) << "\n";
  os << "aux_model:\n";
  os << "  pue: " << fmt_shortest(p.aux_model.pue) << "\n";
  os << "  network_j_per_gb: " << fmt_shortest(p.aux_model.network_j_per_gb) << "\n";
  os << "  storage_j_per_gb_s: " << fmt_shortest(p.aux_model.storage_j_per_gb_s) << "\n";
  os << "overprovision:\n";
  os << "  cpu_threshold: " << fmt_shortest(p.overprovision.cpu_threshold) << "\n";
  os << "  mem_threshold: " << fmt_shortest(p.overprovision.mem_threshold) << "\n";
  os << "  require_peer_headroom: " << (p.overprovision.require_peer_headroom ? "true" : "false")
     << "\n";
  os << "cleaning:\n";
  os << "  method: " << (p.cleaning.method == CleaningConfig::Method::mad ? "mad" : "none") << "\n";
  os << "  mad_k: " << fmt_shortest(p.cleaning.mad_k) << "\n";
  os << "  max_gap_fill: " << p.cleaning.max_gap_fill << "\n";
  return os.str();
}

}  // namespace wattbench
