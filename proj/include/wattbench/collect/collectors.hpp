#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wattbench/core/types.hpp"

namespace wattbench {

enum class BatchStatus { ok, partial, failed };

const char* batch_status_name(BatchStatus s);

/// Result of one poll cycle. Failed batches carry zero samples and a
/// diagnostic; partial means some queries failed or values were dropped.
struct CollectorBatch {
  std::string collector_id;
  double polled_at = 0;
  std::vector<MeasurementSample> samples;
  BatchStatus status = BatchStatus::ok;
  std::string diagnostic;
};

/// In-process sample source, implemented by the simulator driver. Registered
/// with poll() so the simulator backend needs no network hop.
class SimSource {
 public:
  virtual ~SimSource() = default;
  virtual std::vector<MeasurementSample> sample_window(const CollectorConfig& config, double t0,
                                                       double t1) = 0;
};

/// Deterministic per-second drop decision for scripted fault injection.
/// Stateless: hashes (seed, attempt, second) so concurrent pollers and
/// resumed runs agree on which seconds vanish.
bool second_dropped(const FaultInjection& inject, int attempt, std::int64_t second);

/// Poll one collector over the half-open window [t0, t1). Samples outside
/// the window are discarded; backend failures yield a failed batch rather
/// than throwing (the runner's retry policy decides what to do). Throws
/// ConfigError only for precondition violations (t0 >= t1, missing sim
/// source for a simulator-backend config).
CollectorBatch poll(const CollectorConfig& config, double t0, double t1, int attempt = 1,
                    SimSource* sim = nullptr);

}  // namespace wattbench
