#pragma once

#include <cstdint>
#include <vector>

#include "wattbench/core/types.hpp"

namespace wattbench {

// How a drive run ends: after the schedule's last second, or as soon as a
// fixed number of requests has been issued.
struct StopCondition {
  enum class Kind { duration, request_count };
  Kind kind = Kind::duration;
  std::int64_t count = 0;  // request_count only

  bool operator==(const StopCondition&) const = default;
};

/// Desired closed-loop user concurrency per one-second step.
struct UserSchedule {
  std::vector<int> target_users;
  StopCondition stop;

  std::int64_t duration() const { return static_cast<std::int64_t>(target_users.size()); }
  bool operator==(const UserSchedule&) const = default;
};

/// Expands a workload spec into a concrete per-second user schedule.
///
/// stress:  linear ramp from 0 at the first second to exactly peak_users at
///          the last.
/// fixed:   constant peak_users, stopping at fixed_request_count requests.
/// shaped:  a compressed day: Gaussian rush-hour bumps peaking at 9/24 and
///          17/24 of the duration, smaller midday bumps between them, and a
///          nighttime floor of shaped_floor_fraction x peak (at least 1).
/// pausing: 60 s bursts of pausing_users separated by idle gaps that start at
///          max(1, round(think_time)) seconds and double after every burst.
///
/// Pure function of the spec; throws ConfigError when the spec is invalid.
UserSchedule build_schedule(const WorkloadSpec& spec);

}  // namespace wattbench
