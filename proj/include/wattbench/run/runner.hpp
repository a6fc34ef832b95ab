#pragma once

#include <string>
#include <vector>

#include "wattbench/core/types.hpp"
#include "wattbench/run/driver.hpp"
#include "wattbench/run/state.hpp"

namespace wattbench {

inline constexpr const char* kWattbenchVersion = "0.1.0";

struct RunnerOptions {
  std::string run_dir;  // empty = plan.output_dir
  double ready_timeout_s = 120;
};

struct RunOutcome {
  int exit_code = 0;  // 0 all cells done, 2 some cell still faulty after retries
  std::string run_dir;
  std::vector<CellHistory> cells;
};

/// The workload generator host: the lexicographically first candidate node
/// hosting zero SUT replicas (application or service layer pods). Throws
/// ConfigError advising local workload placement when every node is taken.
std::string isolate_workload_node(const TopologyMap& topology,
                                  const std::vector<std::string>& candidates);

/// Pre-run checks beyond plan validation: the scenario loads, descriptors
/// are readable (and parse, where the driver can tell), resource specs name
/// real services, and wall-clock collectors answer a probe query. Verifies
/// presence only; never installs anything. Throws ConfigError.
void preflight(const ExperimentPlan& plan, DeploymentDriver& driver);

/// Runs every (variant x workload x repetition) cell in order, retrying
/// faulty cells up to plan.max_attempts, then writes the comparison report
/// and reproduction manifest into the run directory. All repetitions of one
/// (variant, workload) pair finish before the next pair starts.
RunOutcome execute_plan(const ExperimentPlan& plan, DeploymentDriver& driver,
                        const RunnerOptions& opts = {});

/// Continues an interrupted run from <run-dir>/state.jsonl and the plan
/// snapshot stored beside it. Completed cells never re-execute; an attempt
/// that was mid-flight when the process died is archived as interrupted and
/// a fresh attempt takes the next number.
RunOutcome resume_run(const std::string& run_dir, DeploymentDriver& driver,
                      const RunnerOptions& opts = {});

}  // namespace wattbench
