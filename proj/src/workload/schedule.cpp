#include "wattbench/workload/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "wattbench/core/error.hpp"

namespace wattbench {

namespace {

void check_spec(const WorkloadSpec& spec) {
  if (spec.duration_s < 1) throw ConfigError("workload duration must be >= 1 s");
  if (spec.peak_users < 1) throw ConfigError("workload peak_users must be >= 1");
  if (spec.think_time < 0) throw ConfigError("workload think_time must be >= 0");
  if (spec.pausing_users < 1) throw ConfigError("workload pausing_users must be >= 1");
  if (spec.shaped_floor_fraction < 0 || spec.shaped_floor_fraction > 1)
    throw ConfigError("workload shaped_floor_fraction must lie in [0, 1]");
  const bool has_count = spec.fixed_request_count.has_value();
  if (has_count != (spec.shape == WorkloadShape::fixed))
    throw ConfigError("fixed_request_count is required for fixed workloads and invalid otherwise");
  if (has_count && *spec.fixed_request_count < 1)
    throw ConfigError("fixed_request_count must be >= 1");
}

std::vector<int> stress_ramp(std::int64_t duration, int peak) {
  std::vector<int> users(static_cast<std::size_t>(duration));
  if (duration == 1) {
    users[0] = peak;
    return users;
  }
  const double last = static_cast<double>(duration - 1);
  for (std::int64_t t = 0; t < duration; t++) {
    users[static_cast<std::size_t>(t)] =
        static_cast<int>(std::llround(peak * (static_cast<double>(t) / last)));
  }
  return users;
}

std::vector<int> shaped_day(const WorkloadSpec& spec) {
  const auto d = static_cast<double>(spec.duration_s);
  // One schedule-hour of spread per bump; the rush-hour bumps sit far enough
  // apart (8 sigma) that their overlap cannot move the maxima.
  const double sigma = d / 24.0;
  struct Bump {
    double center;
    double weight;
  };
  const Bump bumps[] = {
      {d * (9.0 / 24.0), 1.0},
      {d * (17.0 / 24.0), 1.0},
      {d * (12.0 / 24.0), 0.35},
      {d * (14.0 / 24.0), 0.35},
  };

  std::vector<double> raw(static_cast<std::size_t>(spec.duration_s));
  double raw_max = 0;
  for (std::int64_t t = 0; t < spec.duration_s; t++) {
    double v = 0;
    for (const auto& b : bumps) {
      const double z = (static_cast<double>(t) - b.center) / sigma;
      v += b.weight * std::exp(-0.5 * z * z);
    }
    raw[static_cast<std::size_t>(t)] = v;
    raw_max = std::max(raw_max, v);
  }

  const double floor_users =
      std::max(1.0, std::round(spec.shaped_floor_fraction * spec.peak_users));
  std::vector<int> users(raw.size());
  for (std::size_t t = 0; t < raw.size(); t++) {
    const double v = floor_users + (spec.peak_users - floor_users) * (raw[t] / raw_max);
    users[t] = static_cast<int>(std::max(1.0, std::round(v)));
  }
  return users;
}

std::vector<int> pausing_bursts(const WorkloadSpec& spec) {
  constexpr std::int64_t kBurstSeconds = 60;
  const std::int64_t base_gap = std::max<std::int64_t>(1, std::llround(spec.think_time));

  std::vector<int> users(static_cast<std::size_t>(spec.duration_s), 0);
  std::int64_t t = 0;
  for (int cycle = 0; t < spec.duration_s; cycle++) {
    for (std::int64_t i = 0; i < kBurstSeconds && t < spec.duration_s; i++, t++)
      users[static_cast<std::size_t>(t)] = spec.pausing_users;
    // Gaps double after every burst; past 2^40 the schedule is all idle
    // anyway, so cap the shift instead of overflowing.
    const std::int64_t gap = base_gap << std::min(cycle, 40);
    t += gap;  // seconds already zeroed
  }
  return users;
}

}  // namespace

UserSchedule build_schedule(const WorkloadSpec& spec) {
  check_spec(spec);

  UserSchedule out;
  switch (spec.shape) {
    case WorkloadShape::stress:
      out.target_users = stress_ramp(spec.duration_s, spec.peak_users);
      break;
    case WorkloadShape::fixed:
      out.target_users =
          std::vector<int>(static_cast<std::size_t>(spec.duration_s), spec.peak_users);
      out.stop = {StopCondition::Kind::request_count, *spec.fixed_request_count};
      break;
    case WorkloadShape::shaped:
      out.target_users = shaped_day(spec);
      break;
    case WorkloadShape::pausing:
      out.target_users = pausing_bursts(spec);
      break;
  }
  return out;
}

}  // namespace wattbench
