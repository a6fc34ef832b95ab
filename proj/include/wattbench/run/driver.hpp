#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "wattbench/collect/enrich.hpp"
#include "wattbench/core/error.hpp"
#include "wattbench/core/types.hpp"
#include "wattbench/sim/sim.hpp"
#include "wattbench/workload/scenario.hpp"
#include "wattbench/workload/schedule.hpp"

namespace wattbench {

/// A build/deploy/teardown step failed in the driver. Carries the captured
/// tool output so the runner can archive it with the faulty attempt.
class DriverError : public std::runtime_error {
 public:
  DriverError(const std::string& what, std::string tool_log = "")
      : std::runtime_error(what), log(std::move(tool_log)) {}
  std::string log;
};

struct BuildArtifact {
  std::string ref;  // image digest or content fingerprint
  std::string log;  // full tool output
};

struct DeployHandle {
  std::string id;

  bool operator==(const DeployHandle&) const = default;
};

/// Lifecycle seam between the runner and whatever hosts the SUT. teardown is
/// idempotent: unknown or already-gone handles are a no-op.
class DeploymentDriver {
 public:
  virtual ~DeploymentDriver() = default;

  virtual std::string name() const = 0;

  /// True when deployments run on a virtual clock. The runner then executes
  /// the whole workload first and samples collectors from the finished trace
  /// instead of polling while it runs.
  virtual bool virtual_clock() const = 0;

  virtual BuildArtifact build(const VariantSpec& variant) = 0;
  virtual DeployHandle deploy(const std::string& descriptor_text) = 0;
  /// Blocks until the deployment serves traffic. Throws DriverError on
  /// timeout.
  virtual void wait_ready(const DeployHandle& handle, double timeout_s) = 0;
  virtual TopologyMap topology(const DeployHandle& handle) = 0;
  virtual void teardown(const DeployHandle& handle) = 0;

  /// Accumulated subprocess transcript since the last call; empty for
  /// drivers that spawn none. The runner archives it per phase.
  virtual std::string take_transcript() { return ""; }
};

/// Workload products of one simulated cell.
struct SimLoadResult {
  DriveResult drive;
  SimTrace trace;
};

/// In-process driver: a deployment is a parsed, validated topology and the
/// cluster model runs the load on the virtual clock.
class SimDriver : public DeploymentDriver {
 public:
  std::string name() const override { return "sim"; }
  bool virtual_clock() const override { return true; }

  /// Nothing to compile; the artifact ref fingerprints the variant's
  /// descriptor file so the manifest can prove what ran.
  BuildArtifact build(const VariantSpec& variant) override;
  DeployHandle deploy(const std::string& descriptor_text) override;
  void wait_ready(const DeployHandle& handle, double timeout_s) override;
  TopologyMap topology(const DeployHandle& handle) override;
  void teardown(const DeployHandle& handle) override;

  /// Runs settle idle seconds followed by the schedule against a fresh
  /// cluster whose clock starts at zero. Requests therefore start at
  /// t = settle; deterministic in every argument.
  SimLoadResult load(const DeployHandle& handle, const UserSchedule& schedule,
                     const Scenario& scenario, std::uint64_t seed, std::int64_t settle_s);

  /// The deployed topology (post-patching), for limits and service kinds.
  const Topology& deployed(const DeployHandle& handle) const;

 private:
  const Topology& find(const DeployHandle& handle) const;

  std::map<std::string, Topology> live_;
  int next_id_ = 1;
};

/// Command templates the external driver shells out to. Placeholders
/// {source}, {variant}, {descriptor}, and {handle} are substituted
/// shell-quoted; stdout and stderr are captured merged. Commands inherit the
/// environment, including WATTBENCH_CREDENTIALS for cluster access.
struct ExternalDriverConfig {
  std::string build_cmd;     // {source} {variant}; last output line = artifact ref
  std::string deploy_cmd;    // {descriptor}; last output line = handle id
  std::string ready_cmd;     // {handle}; exit 0 = ready, polled until timeout
  std::string topology_cmd;  // {handle}; lines of: pod node service layer
  std::string endpoint_cmd;  // {handle}; last output line = workload base URL
  std::string teardown_cmd;  // {handle}
  std::string scratch_dir;   // where descriptor files are written; default /tmp
  double ready_poll_s = 2.0;

  bool operator==(const ExternalDriverConfig&) const = default;
};

ExternalDriverConfig parse_driver_config(const std::string& yaml_text);
ExternalDriverConfig load_driver_config(const std::string& path);

/// Adapter around the user's build and deployment tooling. Every subprocess
/// invocation is appended to the transcript for the run artifact.
class ExternalCommandDriver : public DeploymentDriver {
 public:
  explicit ExternalCommandDriver(ExternalDriverConfig config);

  std::string name() const override { return "external"; }
  bool virtual_clock() const override { return false; }

  BuildArtifact build(const VariantSpec& variant) override;
  DeployHandle deploy(const std::string& descriptor_text) override;
  void wait_ready(const DeployHandle& handle, double timeout_s) override;
  TopologyMap topology(const DeployHandle& handle) override;
  void teardown(const DeployHandle& handle) override;
  std::string take_transcript() override;

  /// Base URL the workload generator should target.
  std::string endpoint(const DeployHandle& handle);

 private:
  struct Command {
    int exit_code = -1;
    std::string output;
  };
  Command run(const std::string& templ, const std::map<std::string, std::string>& subs);

  ExternalDriverConfig config_;
  std::map<std::string, bool> torn_;  // handle id -> torn down
  std::string transcript_;
  int next_id_ = 1;
};

}  // namespace wattbench
