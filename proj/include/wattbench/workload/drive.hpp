#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wattbench/core/types.hpp"
#include "wattbench/workload/scenario.hpp"
#include "wattbench/workload/schedule.hpp"

namespace wattbench {

struct SubmitResult {
  double latency = 0;  // seconds until the response completes
  int status = 0;
  bool success = false;
};

/// A discrete-time request sink for virtual-clock driving (the simulator, or
/// anything test-shaped). begin/end_second bracket all submissions whose
/// start falls inside that second; submit returns the outcome immediately so
/// the closed loop can schedule the user's next step.
class VirtualTarget {
 public:
  virtual ~VirtualTarget() = default;
  virtual void begin_second(std::int64_t t) { (void)t; }
  virtual void end_second(std::int64_t t) { (void)t; }
  virtual SubmitResult submit(double now, const ScenarioStep& step) = 0;
};

struct DriveResult {
  std::vector<RequestRecord> records;  // sorted by start time
  double started = 0;
  double ended = 0;
  bool aborted = false;

  bool operator==(const DriveResult&) const = default;
};

/// Drives the schedule on a virtual clock starting at base_time: per-second
/// user pool resizing, per-user weighted step choice and think times, exact
/// request_count stop. Deterministic in (schedule, scenario, seed).
DriveResult drive_virtual(const UserSchedule& schedule, VirtualTarget& target,
                          const Scenario& scenario, std::uint64_t seed, double base_time = 0.0);

struct HttpDriveConfig {
  std::uint64_t seed = 0;
  double abort_after = 30.0;  // seconds without any successful response
  double connect_timeout = 5.0;
  double read_timeout = 10.0;
};

/// Same loop against a live HTTP base URL (threads, wall clock). Latency
/// spans connection setup to the end of the response body. If every request
/// fails for abort_after consecutive seconds the run stops with aborted set.
DriveResult drive_http(const UserSchedule& schedule, const std::string& base_url,
                       const Scenario& scenario, const HttpDriveConfig& config);

inline constexpr const char* kRequestLogHeader = "start,endpoint,status,latency_s,success";

std::string render_request_log(const std::vector<RequestRecord>& records);
std::vector<RequestRecord> parse_request_log(const std::string& csv_text);
void write_request_log(const std::string& path, const std::vector<RequestRecord>& records);
std::vector<RequestRecord> read_request_log(const std::string& path);

}  // namespace wattbench
