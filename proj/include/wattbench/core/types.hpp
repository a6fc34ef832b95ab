#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wattbench {

// All core types are immutable by convention after construction and safe to
// share across threads.

/// The five layers of the cloud stack a measurement can belong to.
enum class Layer { application, service, platform, isolation, physical };

const char* layer_name(Layer l);
Layer layer_from_name(const std::string& s);

enum class SampleKind { cpu_millicores, cpu_fraction, mem_bytes, watts, request_count, custom };

const char* sample_kind_name(SampleKind k);
SampleKind sample_kind_from_name(const std::string& s);

/// One timestamped scalar reading from a collector.
struct MeasurementSample {
  double ts = 0;  // UTC seconds, fractional allowed
  Layer layer = Layer::service;
  std::string source;  // collector id
  std::string node;
  std::string pod;  // empty for node-level series
  SampleKind kind = SampleKind::custom;
  double value = 0;
  std::string unit;

  // Attribution filled by enrich(); never serialized to the trace schema.
  std::string service;
  bool unattributed = false;

  bool operator==(const MeasurementSample&) const = default;
};

/// Throws DataError when a sample violates its invariants (non-finite value,
/// cpu_fraction outside [0,1], negative watts or bytes).
void validate_sample(const MeasurementSample& s);

/// One client-observed request.
struct RequestRecord {
  double start = 0;
  std::string endpoint;
  int status = 0;
  double latency = 0;  // seconds, end to end
  bool success = false;

  bool operator==(const RequestRecord&) const = default;
};

struct ResourceSpec {
  std::int64_t cpu_limit_millicores = 0;
  std::int64_t mem_limit_bytes = 0;
  int replicas_min = 1;
  int replicas_max = 1;

  bool operator==(const ResourceSpec&) const = default;
};

/// One key-path override applied to a deployment descriptor. The value is
/// kept as its YAML scalar literal and typed when applied.
struct PatchOp {
  std::string path;
  std::string value;

  bool operator==(const PatchOp&) const = default;
};

enum class WorkloadShape { shaped, fixed, pausing, stress };

const char* workload_shape_name(WorkloadShape s);
WorkloadShape workload_shape_from_name(const std::string& s);

struct WorkloadSpec {
  std::string name;  // defaults to the shape name
  WorkloadShape shape = WorkloadShape::fixed;
  std::int64_t duration_s = 0;
  int peak_users = 1;
  std::optional<std::int64_t> fixed_request_count;
  std::uint64_t seed = 0;
  double think_time = 1.0;  // seconds; for pausing, the base gap
  int pausing_users = 25;
  double shaped_floor_fraction = 0.05;

  bool operator==(const WorkloadSpec&) const = default;
};

/// One buildable, deployable realization of the system under test.
struct VariantSpec {
  std::string name;
  std::string source;                 // directory path or repo URL + branch
  std::string deployment_descriptor;  // path
  std::map<std::string, ResourceSpec> resource_specs;  // by service name
  std::vector<PatchOp> patches;
  std::vector<WorkloadSpec> workload_overrides;  // empty = plan workloads

  bool operator==(const VariantSpec&) const = default;
};

struct CostBook {
  double pod_cpu_price = 0;        // currency per vCPU-second
  double pod_mem_price = 0;        // currency per GB-second
  double fn_invocation_price = 0;  // currency per request
  double fn_gbs_price = 0;         // currency per GB-second
  std::string currency = "USD";

  bool operator==(const CostBook&) const = default;
};

struct AuxModel {
  double pue = 1.0;  // power usage effectiveness, >= 1
  double network_j_per_gb = 0;
  double storage_j_per_gb_s = 0;

  bool operator==(const AuxModel&) const = default;
};

struct OverProvisionRule {
  double cpu_threshold = 0.49;
  double mem_threshold = 0.49;
  bool require_peer_headroom = true;

  bool operator==(const OverProvisionRule&) const = default;
};

struct CleaningConfig {
  enum class Method { mad, none };
  Method method = Method::mad;
  double mad_k = 5.0;
  int max_gap_fill = 3;  // seconds

  bool operator==(const CleaningConfig&) const = default;
};

/// One query a collector runs; results are tagged with the given layer/kind.
struct QuerySpec {
  std::string query;
  Layer layer = Layer::service;
  SampleKind kind = SampleKind::custom;
  double scale = 1.0;    // unit conversion applied at ingestion (Wh -> J: 3600)
  bool counter = false;  // cumulative counter; rate-converted at aggregation
  std::string unit;

  bool operator==(const QuerySpec&) const = default;
};

/// Scripted fault injection: drops whole seconds of a collector's output.
struct FaultInjection {
  double drop_seconds_fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> attempts;  // empty = every attempt

  bool enabled_for(int attempt) const;
  bool operator==(const FaultInjection&) const = default;
};

enum class CollectorBackend { tsdb_http, cluster_metrics, power_meter, trace_replay, simulator };

const char* collector_backend_name(CollectorBackend b);
CollectorBackend collector_backend_from_name(const std::string& s);

struct CollectorConfig {
  std::string id;
  CollectorBackend backend = CollectorBackend::simulator;
  std::string endpoint;  // URL or path; unused for the simulator backend
  std::vector<QuerySpec> queries;
  double poll_interval = 5;  // seconds, [1, 60]
  bool mandatory = false;
  FaultInjection inject;

  bool operator==(const CollectorConfig&) const = default;
};

enum class WorkloadPlacement { local, cluster };

/// variants x workloads x repetitions plus environment and tolerances.
struct ExperimentPlan {
  std::vector<VariantSpec> variants;
  std::vector<WorkloadSpec> workloads;
  int repetitions = 1;
  double settle = 60;
  double inter_run_settle = 120;
  bool teardown_between_runs = true;
  int max_attempts = 3;
  std::vector<CollectorConfig> collectors;
  CostBook cost_book;
  AuxModel aux_model;
  OverProvisionRule overprovision;
  CleaningConfig cleaning;
  double coverage_threshold = 0.9;
  std::vector<std::string> platform_prefixes;  // namespace/name prefixes booked as platform
  std::vector<std::string> sut_services;       // empty = derive from resource specs
  std::string scenario_path;
  std::string output_dir;
  WorkloadPlacement workload_placement = WorkloadPlacement::local;
  double trim_head = 0;  // seconds cut from the normal-operation window
  double trim_tail = 0;

  bool operator==(const ExperimentPlan&) const = default;
};

/// Default prefixes classifying infrastructure pods as platform overhead.
std::vector<std::string> default_platform_prefixes();

}  // namespace wattbench
