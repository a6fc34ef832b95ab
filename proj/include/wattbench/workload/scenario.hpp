#pragma once

#include <string>
#include <vector>

namespace wattbench {

/// One weighted step a virtual user can take. Users pick steps by weight,
/// issue the request, then pause for think_time before the next step.
struct ScenarioStep {
  std::string method = "GET";  // GET or POST
  std::string path = "/";
  double weight = 1.0;
  double think_time = 1.0;  // seconds after the response before the next step

  bool operator==(const ScenarioStep&) const = default;
};

struct Scenario {
  std::vector<ScenarioStep> steps;

  bool operator==(const Scenario&) const = default;
};

/// Single GET / with one second of think time; used when a plan names no
/// scenario file.
Scenario default_scenario();

/// Parses the YAML scenario format (`steps:` list of method/path/weight/
/// think_time). Throws ConfigError on malformed input, unknown keys,
/// unsupported methods, or non-positive weights.
Scenario parse_scenario(const std::string& yaml_text);

/// parse_scenario over a file's contents; errors mention the path.
Scenario load_scenario(const std::string& path);

}  // namespace wattbench
