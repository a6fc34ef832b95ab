#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wattbench/agg/energy.hpp"
#include "wattbench/agg/timeline.hpp"
#include "wattbench/core/types.hpp"

namespace wattbench {

// CostBook, AuxModel, and OverProvisionRule live in core/types.hpp with the
// rest of the plan-level configuration. The over-provisioning rule is applied
// per replica-second by scaling_waste(): a replica-second is wasteful when
// both utilization fractions sit strictly below their thresholds and, if
// require_peer_headroom is set, some other replica of the same service
// observed in that second has enough spare capacity (limit minus its own
// usage) to absorb the candidate's absolute usage in both dimensions at once.

// Aggregate usage of one serverless function over the measurement window.
// Produced by the driver (invocation count) and the platform (GB-seconds).
struct FnUsage {
  std::string service;
  std::int64_t invocations = 0;
  double gb_seconds = 0.0;

  bool operator==(const FnUsage&) const = default;
};

struct CostResult {
  double total = 0.0;          // billed provisioned capacity
  double consumed = 0.0;       // billed actual usage, clamped to limits
  bool operator==(const CostResult&) const = default;
};

// Everything the metric computations need for one cell (variant x workload x
// repetition). Timelines must share one grid; requests are the driver's log.
struct MetricsInputs {
  std::vector<ResourceTimeline> timelines;
  EnergyLedger energy;
  std::vector<RequestRecord> requests;
  double window_start = 0.0;  // half-open [window_start, window_end)
  double window_end = 0.0;
  SutSelector is_sut;
  // Deployment kind per billed service: "pod" or "function". Services absent
  // from this map (platform pods, node rows) are not billed.
  std::map<std::string, std::string> service_kinds;
  std::vector<FnUsage> fn_usage;
  OverProvisionRule over_provision;
  CostBook prices;
  AuxModel aux;
  double bytes_transferred = 0.0;
  double storage_gb_seconds = 0.0;
  double energy_coverage = 1.0;  // fraction of window seconds with energy samples
};

// One cell's metric values. Metrics whose preconditions fail (no successful
// requests, no energy attributed, no live capacity) are left unset and render
// as null in the report; FR falls back to 1.0 when requests ran but none
// succeeded while energy metrics drop out.
struct MetricsReport {
  std::optional<double> wr;   // joules per successful request
  std::optional<double> ro;   // overhead / (overhead + sut)
  std::optional<double> overhead_ratio_raw;  // overhead / sut
  std::optional<double> ru;   // mean utilization of provisioned capacity
  std::optional<double> re;   // joules spent on over-provisioned replicas
  std::optional<double> ac;   // auxiliary joules (facility, network, storage)
  std::optional<double> tc;   // billed cost of provisioned capacity
  std::optional<double> consumed_cost;       // billed cost of actual usage
  std::optional<double> cost_per_kilorequest;  // cents per 1000 successes
  std::optional<double> fr;   // failed / total requests
  std::optional<double> rqs;  // successful requests per second in window
  std::optional<double> lat_p50;  // seconds, nearest-rank over successes
  std::optional<double> lat_p95;
  std::int64_t successful_requests = 0;
  std::int64_t total_requests = 0;
  double total_sut_joules = 0.0;
  double total_overhead_joules = 0.0;
  double energy_coverage = 1.0;

  bool operator==(const MetricsReport&) const = default;
};

// The nine operations. Each throws MetricError when its preconditions fail;
// compute_all() catches those and leaves the corresponding field unset.

/// WR: joules attributed to the system under test per successful request.
double request_consumption(double sut_joules, std::int64_t successful_requests);

/// RO: share of measured energy that is runtime overhead. Zero overhead gives
/// 0; zero total energy is an error.
double runtime_overhead(double overhead_joules, double sut_joules);

/// Secondary overhead ratio: overhead / sut. Zero sut energy is an error.
double overhead_ratio_raw(double overhead_joules, double sut_joules);

/// RU: mean over seconds with live provisioned capacity of the equal-weight
/// average of cpu and memory utilization fractions. Seconds with no live
/// replica are excluded; no such second at all is an error, as is a selected
/// replica without resource limits (the error names the service).
double resource_utilization(const std::vector<ResourceTimeline>& timelines,
                            const SutSelector& is_sut);

/// RE: joules spent on replica-seconds judged over-provisioned by `rule`.
double scaling_waste(const std::vector<ResourceTimeline>& timelines, const OverProvisionRule& rule,
                     const SutSelector& is_sut);

/// AC: (pue - 1) * measured joules, plus network and storage energy models.
double auxiliary_costs(double sut_joules, double overhead_joules, const AuxModel& aux,
                       double bytes_transferred, double storage_gb_seconds);

/// TC and consumed cost. Pods bill limits per live second (consumed bills
/// usage clamped to limits); functions bill invocations and GB-seconds from
/// fn_usage on both sides. Unknown kind strings are an error.
CostResult total_cost(const std::vector<ResourceTimeline>& timelines,
                      const std::map<std::string, std::string>& service_kinds,
                      const std::vector<FnUsage>& fn_usage, const CostBook& prices);

/// Cents per thousand successful requests, from a currency-denominated total.
double cost_per_kilorequest(double total_cost, std::int64_t successful_requests);

/// FR: failed / total over the whole request log.
double failure_rate(std::int64_t failed_requests, std::int64_t total_requests);

/// Rqs: successes whose start falls in [window_start, window_end), divided by
/// the window length.
double throughput(const std::vector<RequestRecord>& requests, double window_start,
                  double window_end);

/// Nearest-rank quantiles over successful-request latencies: rank(q) =
/// ceil(q * n) clamped to at least 1, value = sorted[rank - 1]. Quantiles must
/// lie in (0, 1]; an empty sample is an error.
std::vector<double> latency_quantiles(const std::vector<RequestRecord>& requests,
                                      const std::vector<double>& quantiles);

/// Runs every metric over one cell's inputs, mapping precondition failures to
/// unset fields as described on MetricsReport.
MetricsReport compute_all(const MetricsInputs& in);

}  // namespace wattbench
