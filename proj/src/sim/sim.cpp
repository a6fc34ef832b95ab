#include "wattbench/sim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>
#include <stdexcept>
#include <tuple>

#include "wattbench/agg/energy.hpp"
#include "wattbench/core/error.hpp"
#include "wattbench/metrics/metrics.hpp"

namespace wattbench {

namespace {

// A request that would land beyond this much queued work is rejected.
constexpr double kMaxBacklogSeconds = 10.0;
// Functions scale to zero after this many consecutive demand-free seconds.
constexpr std::int64_t kFunctionIdleSeconds = 60;
// Rejected and unrouted requests still cost the caller a round trip.
constexpr double kRejectLatency = 0.001;

// Same mixer the workload driver uses for its per-user streams; the salt
// sits far above any realistic user id so the cluster's jitter stream never
// collides with them.
constexpr std::uint64_t kJitterSalt = 1ull << 40;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool sim_sut(const std::string&, Layer layer) { return layer == Layer::service; }

}  // namespace

struct SimCluster::Impl {
  // One potential replica slot; series are pushed once per completed second.
  struct Slot {
    std::string name;
    std::string node;
    std::size_t node_index = 0;
    std::vector<double> cpu, mem, watts;
    std::vector<bool> miss;
    std::int64_t first_live = -1;
    std::int64_t last_live = -1;
    double cpu_now = 0;  // scratch, valid for live slots within end_second
  };

  struct ServiceState {
    const SimService* spec = nullptr;
    double rate = 0;  // requests per second per replica
    int live = 0;
    std::int64_t queue = 0;   // accepted, not yet served
    double credit = 0;        // fractional service capacity carried while backlogged
    double warm_until = -1;   // requests before this instant wait for the cold start
    std::int64_t arrivals = 0;
    std::int64_t idle_run = 0;
    std::int64_t over_since = -1;
    std::int64_t under_since = -1;
    std::vector<Slot> slots;
  };

  Topology topo;
  std::uint64_t seed = 0;
  double base_time = 0;
  std::mt19937_64 rng;
  std::vector<ServiceState> services;
  std::map<std::string, std::size_t> route_to_service;  // resolved from topo.routes
  std::vector<std::vector<double>> node_watts;          // [node][second]
  std::vector<std::vector<double>> platform_watts;
  std::vector<ScalingEvent> events;
  std::vector<std::int64_t> served_per_second, failed_per_second;
  std::int64_t now_second = 0;
  std::int64_t seconds = 0;
  std::int64_t injected = 0, served = 0, failed = 0;
  std::int64_t served_sec = 0, failed_sec = 0;
  bool finished = false;

  void wake(std::size_t svc_index, double now);
  void record_usage(ServiceState& s, double util);
  void autoscale(ServiceState& s, double util, std::int64_t t);
};

SimCluster::SimCluster(Topology topo, std::uint64_t seed, double base_time)
    : impl_(std::make_unique<Impl>()) {
  validate_topology(topo);
  impl_->topo = std::move(topo);
  impl_->seed = seed;
  impl_->base_time = base_time;
  impl_->rng.seed(mix_seed(seed, kJitterSalt));

  std::map<std::string, std::size_t> node_index;
  for (std::size_t i = 0; i < impl_->topo.nodes.size(); i++)
    node_index[impl_->topo.nodes[i].id] = i;
  impl_->node_watts.resize(impl_->topo.nodes.size());
  impl_->platform_watts.resize(impl_->topo.nodes.size());

  for (const auto& spec : impl_->topo.services) {
    Impl::ServiceState s;
    s.spec = &spec;
    s.rate = static_cast<double>(spec.replica.cpu_limit_millicores) / spec.per_request_cpu_ms;
    s.live = spec.kind == SimServiceKind::function ? spec.replica.replicas_min
                                                   : std::max(1, spec.replica.replicas_min);
    std::vector<std::string> placement = spec.placement;
    if (placement.empty()) {
      for (const auto& n : impl_->topo.nodes) placement.push_back(n.id);
    }
    for (int i = 0; i < spec.replica.replicas_max; i++) {
      Impl::Slot slot;
      slot.name = spec.name + "-" + std::to_string(i);
      slot.node = placement[static_cast<std::size_t>(i) % placement.size()];
      slot.node_index = node_index.at(slot.node);
      s.slots.push_back(std::move(slot));
    }
    impl_->services.push_back(std::move(s));
  }
  for (const auto& [path, svc] : impl_->topo.routes) {
    for (std::size_t i = 0; i < impl_->topo.services.size(); i++) {
      if (impl_->topo.services[i].name == svc) impl_->route_to_service[path] = i;
    }
  }
}

SimCluster::~SimCluster() = default;

const Topology& SimCluster::topology() const { return impl_->topo; }

void SimCluster::begin_second(std::int64_t t) {
  impl_->now_second = t;
  impl_->served_sec = 0;
  impl_->failed_sec = 0;
}

void SimCluster::Impl::wake(std::size_t svc_index, double now) {
  auto& s = services[svc_index];
  const int to = std::max(1, s.spec->replica.replicas_min);
  events.push_back({now_second, s.spec->name, 0, to, "wake"});
  s.live = to;
  s.warm_until = now + s.spec->cold_start;
  s.idle_run = 0;
  s.over_since = -1;
  s.under_since = -1;
}

SubmitResult SimCluster::submit(double now, const ScenarioStep& step) {
  auto& im = *impl_;
  auto it = im.route_to_service.find(step.path);
  if (it == im.route_to_service.end()) it = im.route_to_service.find("/");
  if (it == im.route_to_service.end()) {
    im.injected++;
    im.failed++;
    im.failed_sec++;
    return {kRejectLatency, 404, false};
  }
  auto& s = im.services[it->second];
  if (s.live == 0) im.wake(it->second, now);

  const double capacity = static_cast<double>(s.live) * s.rate;
  im.injected++;
  if (static_cast<double>(s.queue + 1) / capacity > kMaxBacklogSeconds) {
    im.failed++;
    im.failed_sec++;
    return {kRejectLatency, 503, false};
  }
  s.queue++;
  s.arrivals++;
  const double cold_wait = std::max(0.0, s.warm_until - now);
  const double queue_wait = static_cast<double>(s.queue - 1) / capacity;
  const double jitter = 0.9 + 0.2 * unit_draw(im.rng);
  return {cold_wait + queue_wait + s.spec->service_time * jitter, 200, true};
}

void SimCluster::Impl::record_usage(ServiceState& s, double util) {
  const auto& spec = s.spec->replica;
  const double cpu = util * static_cast<double>(spec.cpu_limit_millicores);
  const double floor_b = static_cast<double>(s.spec->mem_floor_bytes);
  const double mem = floor_b + util * (static_cast<double>(spec.mem_limit_bytes) - floor_b);
  for (std::size_t i = 0; i < s.slots.size(); i++) {
    auto& slot = s.slots[i];
    const bool live = static_cast<int>(i) < s.live;
    slot.cpu.push_back(live ? cpu : 0.0);
    slot.mem.push_back(live ? mem : 0.0);
    slot.miss.push_back(!live);
    slot.cpu_now = live ? cpu : 0.0;
    if (live) {
      if (slot.first_live < 0) slot.first_live = now_second;
      slot.last_live = now_second;
    }
  }
}

void SimCluster::Impl::autoscale(ServiceState& s, double util, std::int64_t t) {
  const auto& spec = *s.spec;
  const int floor = std::max(1, spec.replica.replicas_min);
  const int ceiling = spec.replica.replicas_max;
  const double raw = static_cast<double>(s.live) * util / spec.autoscaler.target_cpu_fraction;
  // The epsilon keeps an exact ratio (say 2.0) from rounding up on FP noise.
  int desired = static_cast<int>(std::ceil(raw - 1e-9));
  desired = std::clamp(desired, floor, ceiling);
  if (desired > s.live) {
    s.under_since = -1;
    if (s.over_since < 0) s.over_since = t;
    if (static_cast<double>(t - s.over_since) >= spec.autoscaler.scale_up_delay) {
      events.push_back({t, spec.name, s.live, desired, "scale_up"});
      s.live = desired;
      s.over_since = -1;
    }
  } else if (desired < s.live) {
    s.over_since = -1;
    if (s.under_since < 0) s.under_since = t;
    if (static_cast<double>(t - s.under_since) >= spec.autoscaler.scale_down_delay) {
      events.push_back({t, spec.name, s.live, desired, "scale_down"});
      s.live = desired;
      s.under_since = -1;
    }
  } else {
    s.over_since = -1;
    s.under_since = -1;
  }
}

void SimCluster::end_second(std::int64_t t) {
  auto& im = *impl_;

  for (auto& s : im.services) {
    const double capacity = static_cast<double>(s.live) * s.rate;
    const double demand = static_cast<double>(s.queue);
    const double util = s.live > 0 ? std::min(1.0, demand / capacity) : 0.0;
    im.record_usage(s, util);

    if (s.live > 0) {
      // Work only happens once the cold start has passed; a partial second
      // contributes a partial credit.
      const double warm = std::clamp(static_cast<double>(t) + 1.0 - s.warm_until, 0.0, 1.0);
      s.credit += capacity * warm;
      const auto n = std::min(s.queue, static_cast<std::int64_t>(std::floor(s.credit + 1e-9)));
      s.queue -= n;
      s.credit -= static_cast<double>(n);
      im.served += n;
      im.served_sec += n;
      if (s.queue == 0) s.credit = 0;  // idle servers do not bank capacity
    }

    if (s.spec->kind == SimServiceKind::function && s.live > 0) {
      s.idle_run = (s.arrivals == 0 && s.queue == 0) ? s.idle_run + 1 : 0;
      if (s.idle_run >= kFunctionIdleSeconds) {
        im.events.push_back({t, s.spec->name, s.live, 0, "scale_to_zero"});
        s.live = 0;
        s.idle_run = 0;
        s.warm_until = -1;
        s.credit = 0;
        s.over_since = -1;
        s.under_since = -1;
      }
    }
    if (s.live > 0) im.autoscale(s, util, t);
    s.arrivals = 0;
  }

  // Power pass: node totals first, then each live replica's share.
  std::vector<double> used(im.topo.nodes.size(), 0.0);
  std::vector<double> limits(im.topo.nodes.size(), 0.0);
  for (const auto& s : im.services) {
    for (int i = 0; i < static_cast<int>(s.slots.size()); i++) {
      // Slots resized away this second already pushed zero usage; what counts
      // here is who was recorded live, which the miss mask remembers.
      const auto& slot = s.slots[static_cast<std::size_t>(i)];
      if (slot.miss.back()) continue;
      used[slot.node_index] += slot.cpu_now;
      limits[slot.node_index] += static_cast<double>(s.spec->replica.cpu_limit_millicores);
    }
  }
  std::vector<double> node_w(im.topo.nodes.size(), 0.0);
  std::vector<double> dyn_total(im.topo.nodes.size(), 0.0);
  std::vector<double> attributed(im.topo.nodes.size(), 0.0);
  for (std::size_t k = 0; k < im.topo.nodes.size(); k++) {
    const auto& node = im.topo.nodes[k];
    const double cap = static_cast<double>(node.cpu_capacity_millicores);
    const double frac = std::min(1.0, used[k] / cap);
    dyn_total[k] = (node.p_max - node.p_idle) * frac;
    node_w[k] = node.p_idle + dyn_total[k];
  }
  for (auto& s : im.services) {
    const double limit = static_cast<double>(s.spec->replica.cpu_limit_millicores);
    for (auto& slot : s.slots) {
      if (slot.miss.back()) {
        slot.watts.push_back(0.0);
        continue;
      }
      const std::size_t k = slot.node_index;
      const auto& node = im.topo.nodes[k];
      const double dyn = used[k] > 0 ? dyn_total[k] * (slot.cpu_now / used[k]) : 0.0;
      const double cap = static_cast<double>(node.cpu_capacity_millicores);
      const double stat = node.p_idle * limit / std::max(cap, limits[k]);
      const double w = dyn + stat;
      slot.watts.push_back(w);
      attributed[k] += w;
    }
  }
  for (std::size_t k = 0; k < im.topo.nodes.size(); k++) {
    im.node_watts[k].push_back(node_w[k]);
    im.platform_watts[k].push_back(std::max(0.0, node_w[k] - attributed[k]));
  }

  im.served_per_second.push_back(im.served_sec);
  im.failed_per_second.push_back(im.failed_sec);
  im.seconds = t + 1;
}

void SimCluster::step(std::int64_t n_requests) {
  const std::int64_t t = impl_->seconds;
  begin_second(t);
  const ScenarioStep root;  // GET "/"
  for (std::int64_t i = 0; i < n_requests; i++) {
    submit(static_cast<double>(t) +
               (static_cast<double>(i) + 0.5) / static_cast<double>(n_requests),
           root);
  }
  end_second(t);
}

TopologyMap SimCluster::pod_map() const { return sim_pod_map(impl_->topo); }

TopologyMap sim_pod_map(const Topology& topo) {
  TopologyMap map;
  for (const auto& s : topo.services) {
    std::vector<std::string> placement = s.placement;
    if (placement.empty()) {
      for (const auto& n : topo.nodes) placement.push_back(n.id);
    }
    for (int i = 0; i < s.replica.replicas_max; i++) {
      map[s.name + "-" + std::to_string(i)] =
          PodInfo{placement[static_cast<std::size_t>(i) % placement.size()], s.name,
                  Layer::service};
    }
  }
  for (const auto& n : topo.nodes)
    map["platform-" + n.id] = PodInfo{n.id, "platform", Layer::platform};
  return map;
}

SimTrace SimCluster::finish() {
  auto& im = *impl_;
  if (im.finished) throw std::logic_error("SimCluster::finish called twice");
  im.finished = true;

  SimTrace tr;
  tr.base_time = im.base_time;
  tr.seconds = im.seconds;
  tr.served_per_second = std::move(im.served_per_second);
  tr.failed_per_second = std::move(im.failed_per_second);
  tr.events = std::move(im.events);

  const auto n = static_cast<int>(im.seconds);
  for (auto& s : im.services) {
    for (auto& slot : s.slots) {
      if (slot.first_live < 0) continue;  // never lived, no row
      ResourceTimeline rt;
      rt.replica = slot.name;
      rt.service = s.spec->name;
      rt.node = slot.node;
      rt.layer = Layer::service;
      rt.grid_start = im.base_time;
      rt.cpu_millicores = Series{im.base_time, std::move(slot.cpu), slot.miss};
      rt.mem_bytes = Series{im.base_time, std::move(slot.mem), slot.miss};
      rt.watts = Series{im.base_time, std::move(slot.watts), slot.miss};
      rt.limits = s.spec->replica;
      rt.lifecycle.push_back({LifecycleEventKind::created,
                              im.base_time + static_cast<double>(slot.first_live)});
      rt.lifecycle.push_back({LifecycleEventKind::ready,
                              im.base_time + static_cast<double>(slot.first_live)});
      if (slot.last_live + 1 < im.seconds)
        rt.lifecycle.push_back({LifecycleEventKind::terminated,
                                im.base_time + static_cast<double>(slot.last_live + 1)});
      tr.timelines.push_back(std::move(rt));
    }
  }
  for (std::size_t k = 0; k < im.topo.nodes.size(); k++) {
    const auto& id = im.topo.nodes[k].id;
    ResourceTimeline platform;
    platform.replica = "platform-" + id;
    platform.service = "platform";
    platform.node = id;
    platform.layer = Layer::platform;
    platform.grid_start = im.base_time;
    platform.cpu_millicores = make_missing_series(im.base_time, n);
    platform.mem_bytes = make_missing_series(im.base_time, n);
    platform.watts = Series{im.base_time, std::move(im.platform_watts[k]),
                            std::vector<bool>(static_cast<std::size_t>(n), false)};
    tr.timelines.push_back(std::move(platform));

    ResourceTimeline node;
    node.node = id;
    node.layer = Layer::physical;
    node.grid_start = im.base_time;
    node.cpu_millicores = make_missing_series(im.base_time, n);
    node.mem_bytes = make_missing_series(im.base_time, n);
    node.watts = Series{im.base_time, std::move(im.node_watts[k]),
                        std::vector<bool>(static_cast<std::size_t>(n), false)};
    tr.timelines.push_back(std::move(node));
  }
  std::sort(tr.timelines.begin(), tr.timelines.end(),
            [](const ResourceTimeline& a, const ResourceTimeline& b) {
              return std::tie(a.layer, a.service, a.replica) <
                     std::tie(b.layer, b.service, b.replica);
            });

  tr.truth.injected = im.injected;
  tr.truth.served = im.served;
  tr.truth.failed = im.failed;
  for (const auto& s : im.services) tr.truth.queued_at_end += s.queue;
  if (im.seconds > 0) {
    const auto ledger = attribute_energy(tr.timelines, sim_sut);
    tr.truth.sut_joules = ledger.sut_joules;
    tr.truth.overhead_joules = ledger.overhead_joules;
    tr.truth.waste_joules = scaling_waste(tr.timelines, OverProvisionRule{}, sim_sut);
    try {
      tr.truth.utilization_mean = resource_utilization(tr.timelines, sim_sut);
    } catch (const MetricError&) {
      // a run where nothing was ever provisioned has no utilization
    }
  }
  return tr;
}

SimResult run_sim(const Topology& topo, const UserSchedule& schedule, const Scenario& scenario,
                  std::uint64_t seed, double base_time) {
  SimCluster cluster(topo, seed, base_time);
  SimResult out;
  out.drive = drive_virtual(schedule, cluster, scenario, seed, base_time);
  out.trace = cluster.finish();
  return out;
}

std::vector<MeasurementSample> SimTraceSource::sample_window(const CollectorConfig& config,
                                                             double t0, double t1) {
  const auto& tr = *trace_;
  std::vector<MeasurementSample> out;
  const auto lo = std::max<std::int64_t>(
      0, static_cast<std::int64_t>(std::ceil(t0 - tr.base_time)));
  const auto hi = std::min<std::int64_t>(
      tr.seconds, static_cast<std::int64_t>(std::ceil(t1 - tr.base_time)));
  for (const auto& q : config.queries) {
    for (const auto& row : tr.timelines) {
      if (row.layer != q.layer) continue;
      const Series* series = nullptr;
      switch (q.kind) {
        case SampleKind::cpu_millicores:
        case SampleKind::cpu_fraction:
          series = &row.cpu_millicores;
          break;
        case SampleKind::mem_bytes:
          series = &row.mem_bytes;
          break;
        case SampleKind::watts:
          series = &row.watts;
          break;
        default:
          continue;  // the simulator has no counter or custom series
      }
      const bool fraction = q.kind == SampleKind::cpu_fraction;
      if (fraction && row.limits.cpu_limit_millicores <= 0) continue;
      for (std::int64_t t = lo; t < hi; t++) {
        const auto i = static_cast<std::size_t>(t);
        if (!series->has(i)) continue;
        double value = series->values[i];
        if (fraction) value /= static_cast<double>(row.limits.cpu_limit_millicores);
        MeasurementSample s;
        s.ts = tr.base_time + static_cast<double>(t);
        s.layer = q.layer;
        s.source = config.id;
        s.node = row.node;
        s.pod = row.replica;
        s.kind = q.kind;
        s.value = value * q.scale;
        s.unit = q.unit;
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

std::string render_sim_truth(const SimGroundTruth& t) {
  nlohmann::json j;
  j["sut_joules"] = t.sut_joules;
  j["overhead_joules"] = t.overhead_joules;
  j["waste_joules"] = t.waste_joules;
  if (t.utilization_mean)
    j["utilization_mean"] = *t.utilization_mean;
  else
    j["utilization_mean"] = nullptr;
  j["injected"] = t.injected;
  j["served"] = t.served;
  j["failed"] = t.failed;
  j["queued_at_end"] = t.queued_at_end;
  return j.dump(2) + "\n";
}

SimGroundTruth parse_sim_truth(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("sim truth: ") + e.what());
  }
  try {
    SimGroundTruth t;
    t.sut_joules = j.at("sut_joules").get<double>();
    t.overhead_joules = j.at("overhead_joules").get<double>();
    t.waste_joules = j.at("waste_joules").get<double>();
    if (!j.at("utilization_mean").is_null())
      t.utilization_mean = j.at("utilization_mean").get<double>();
    t.injected = j.at("injected").get<std::int64_t>();
    t.served = j.at("served").get<std::int64_t>();
    t.failed = j.at("failed").get<std::int64_t>();
    t.queued_at_end = j.at("queued_at_end").get<std::int64_t>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("sim truth: ") + e.what());
  }
}

}  // namespace wattbench
