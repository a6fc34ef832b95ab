#include "wattbench/workload/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "wattbench/core/error.hpp"

namespace wattbench {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
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

}  // namespace

Scenario default_scenario() {
  Scenario s;
  s.steps.push_back(ScenarioStep{});
  return s;
}

Scenario parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario: invalid yaml: ") + e.what());
  }
  if (!root.IsMap()) fail("scenario", "expected a mapping with a 'steps' list");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key != "steps") fail("scenario." + key, "unknown key");
  }
  const YAML::Node steps = root["steps"];
  if (!steps || !steps.IsSequence() || steps.size() == 0)
    fail("scenario.steps", "expected a non-empty list");

  Scenario out;
  for (size_t i = 0; i < steps.size(); i++) {
    const std::string path = "scenario.steps[" + std::to_string(i) + "]";
    const YAML::Node n = steps[i];
    if (!n.IsMap()) fail(path, "expected a mapping");
    static const std::set<std::string> allowed{"method", "path", "weight", "think_time"};
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(path + "." + key, "unknown key");
    }

    ScenarioStep step;
    if (n["method"]) step.method = scalar<std::string>(n["method"], path + ".method");
    if (step.method != "GET" && step.method != "POST")
      fail(path + ".method", "unsupported method '" + step.method + "' (GET or POST)");
    if (!n["path"]) fail(path + ".path", "missing required key");
    step.path = scalar<std::string>(n["path"], path + ".path");
    if (step.path.empty() || step.path[0] != '/')
      fail(path + ".path", "must start with '/'");
    if (n["weight"]) step.weight = scalar<double>(n["weight"], path + ".weight");
    if (!(step.weight > 0)) fail(path + ".weight", "must satisfy weight > 0");
    if (n["think_time"]) step.think_time = scalar<double>(n["think_time"], path + ".think_time");
    if (step.think_time < 0) fail(path + ".think_time", "must satisfy think_time >= 0");
    out.steps.push_back(std::move(step));
  }
  return out;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace wattbench
