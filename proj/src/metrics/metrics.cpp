#include "wattbench/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "wattbench/core/error.hpp"

namespace wattbench {

namespace {

// Per-replica slice the per-second kernels walk. Holding raw pointers keeps
// the hot loops free of map lookups; the vector preserves timeline order,
// which fixes the accumulation order and therefore the exact result.
struct ReplicaView {
  const Series* cpu;
  const Series* mem;
  const Series* watts;
  double cpu_limit;
  double mem_limit;
  const std::string* service;
};

std::vector<ReplicaView> sut_views(const std::vector<ResourceTimeline>& timelines,
                                   const SutSelector& is_sut) {
  std::vector<ReplicaView> views;
  for (const auto& tl : timelines) {
    if (tl.replica.empty()) continue;
    if (!is_sut(tl.service, tl.layer)) continue;
    views.push_back({&tl.cpu_millicores, &tl.mem_bytes, &tl.watts,
                     static_cast<double>(tl.limits.cpu_limit_millicores),
                     static_cast<double>(tl.limits.mem_limit_bytes), &tl.service});
  }
  return views;
}

std::size_t grid_cells(const std::vector<ResourceTimeline>& timelines) {
  std::size_t n = 0;
  for (const auto& tl : timelines) {
    const std::size_t c = tl.cpu_millicores.size();
    if (c != tl.mem_bytes.size() || c != tl.watts.size())
      throw MetricError("timeline series disagree on grid length");
    if (n == 0) n = c;
    if (c != n) throw MetricError("timelines disagree on grid length");
  }
  return n;
}

}  // namespace

double request_consumption(double sut_joules, std::int64_t successful_requests) {
  if (successful_requests < 1) throw MetricError("no successful requests");
  return sut_joules / static_cast<double>(successful_requests);
}

double runtime_overhead(double overhead_joules, double sut_joules) {
  const double total = overhead_joules + sut_joules;
  if (total <= 0) throw MetricError("no attributed energy");
  return overhead_joules / total;
}

double overhead_ratio_raw(double overhead_joules, double sut_joules) {
  if (sut_joules <= 0) throw MetricError("no energy attributed to the system under test");
  return overhead_joules / sut_joules;
}

double resource_utilization(const std::vector<ResourceTimeline>& timelines,
                            const SutSelector& is_sut) {
  const auto views = sut_views(timelines, is_sut);
  for (const auto& v : views) {
    if (v.cpu_limit <= 0 || v.mem_limit <= 0)
      throw MetricError("no resource spec for service '" + *v.service + "'");
  }
  const auto n = static_cast<long long>(grid_cells(timelines));

  // Each second is independent, so threads fill disjoint slots and the serial
  // fold below reads them in time order; results match a serial run bitwise.
  std::vector<double> ratio(static_cast<std::size_t>(n), 0.0);
  std::vector<unsigned char> live(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(static)
  for (long long t = 0; t < n; t++) {
    const auto ti = static_cast<std::size_t>(t);
    double used_cpu = 0, prov_cpu = 0, used_mem = 0, prov_mem = 0;
    for (const auto& v : views) {
      const bool seen = v.cpu->has(ti) || v.mem->has(ti) || v.watts->has(ti);
      if (!seen) continue;
      prov_cpu += v.cpu_limit;
      prov_mem += v.mem_limit;
      if (v.cpu->has(ti)) used_cpu += v.cpu->values[ti];
      if (v.mem->has(ti)) used_mem += v.mem->values[ti];
    }
    if (prov_cpu > 0 && prov_mem > 0) {
      ratio[ti] = 0.5 * (used_cpu / prov_cpu + used_mem / prov_mem);
      live[ti] = 1;
    }
  }

  double sum = 0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < static_cast<std::size_t>(n); t++) {
    if (!live[t]) continue;
    sum += ratio[t];
    count++;
  }
  if (count == 0) throw MetricError("no second with live provisioned capacity");
  return sum / static_cast<double>(count);
}

double scaling_waste(const std::vector<ResourceTimeline>& timelines, const OverProvisionRule& rule,
                     const SutSelector& is_sut) {
  const auto views = sut_views(timelines, is_sut);
  const auto n = static_cast<long long>(grid_cells(timelines));

  std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
  for (long long t = 0; t < n; t++) {
    const auto ti = static_cast<std::size_t>(t);
    double second = 0;
    for (std::size_t i = 0; i < views.size(); i++) {
      const auto& cand = views[i];
      // Only replicas with both usage readings this second can be judged.
      if (!cand.cpu->has(ti) || !cand.mem->has(ti)) continue;
      if (cand.cpu_limit <= 0 || cand.mem_limit <= 0) continue;
      const double used_cpu = cand.cpu->values[ti];
      const double used_mem = cand.mem->values[ti];
      if (!(used_cpu / cand.cpu_limit < rule.cpu_threshold)) continue;
      if (!(used_mem / cand.mem_limit < rule.mem_threshold)) continue;
      if (rule.require_peer_headroom) {
        bool absorbable = false;
        for (std::size_t j = 0; j < views.size() && !absorbable; j++) {
          if (j == i) continue;
          const auto& peer = views[j];
          if (*peer.service != *cand.service) continue;
          if (!peer.cpu->has(ti) || !peer.mem->has(ti)) continue;
          const double spare_cpu = peer.cpu_limit - peer.cpu->values[ti];
          const double spare_mem = peer.mem_limit - peer.mem->values[ti];
          if (spare_cpu >= used_cpu && spare_mem >= used_mem) absorbable = true;
        }
        if (!absorbable) continue;
      }
      // A wasteful second with no power reading still counts, at 0 J.
      if (cand.watts->has(ti)) second += cand.watts->values[ti];
    }
    partial[ti] = second;
  }

  double total = 0;
  for (std::size_t t = 0; t < static_cast<std::size_t>(n); t++) total += partial[t];
  return total;
}

double auxiliary_costs(double sut_joules, double overhead_joules, const AuxModel& aux,
                       double bytes_transferred, double storage_gb_seconds) {
  const double facility = (aux.pue - 1.0) * (sut_joules + overhead_joules);
  const double network = aux.network_j_per_gb * (bytes_transferred / 1e9);
  const double storage = aux.storage_j_per_gb_s * storage_gb_seconds;
  return facility + network + storage;
}

double cost_per_kilorequest(double total_cost, std::int64_t successful_requests) {
  if (successful_requests < 1) throw MetricError("no successful requests");
  return total_cost * 100.0 * 1000.0 / static_cast<double>(successful_requests);
}

double failure_rate(std::int64_t failed_requests, std::int64_t total_requests) {
  if (total_requests < 1) throw MetricError("empty request log");
  return static_cast<double>(failed_requests) / static_cast<double>(total_requests);
}

double throughput(const std::vector<RequestRecord>& requests, double window_start,
                  double window_end) {
  if (!(window_end > window_start)) throw MetricError("empty throughput window");
  std::int64_t hits = 0;
  for (const auto& r : requests) {
    if (r.success && r.start >= window_start && r.start < window_end) hits++;
  }
  return static_cast<double>(hits) / (window_end - window_start);
}

std::vector<double> latency_quantiles(const std::vector<RequestRecord>& requests,
                                      const std::vector<double>& quantiles) {
  std::vector<double> lat;
  lat.reserve(requests.size());
  for (const auto& r : requests) {
    if (r.success) lat.push_back(r.latency);
  }
  if (lat.empty()) throw MetricError("no successful requests");
  std::sort(lat.begin(), lat.end());

  std::vector<double> out;
  out.reserve(quantiles.size());
  const auto n = static_cast<double>(lat.size());
  for (double q : quantiles) {
    if (!(q > 0.0 && q <= 1.0)) throw MetricError("quantile outside (0, 1]");
    auto rank = static_cast<std::size_t>(std::ceil(q * n));
    if (rank < 1) rank = 1;
    out.push_back(lat[rank - 1]);
  }
  return out;
}

MetricsReport compute_all(const MetricsInputs& in) {
  MetricsReport r;
  r.total_requests = static_cast<std::int64_t>(in.requests.size());
  for (const auto& req : in.requests) {
    if (req.success) r.successful_requests++;
  }
  const std::int64_t failed = r.total_requests - r.successful_requests;

  r.total_sut_joules = in.energy.sut_joules;
  r.total_overhead_joules = in.energy.overhead_joules;
  r.energy_coverage = in.energy_coverage;

  // Each metric degrades independently: a precondition failure clears that
  // field and leaves the rest of the report intact.
  auto compute = [](std::optional<double>& slot, auto&& fn) {
    try {
      slot = fn();
    } catch (const MetricError&) {
      slot.reset();
    }
  };

  compute(r.wr, [&] { return request_consumption(r.total_sut_joules, r.successful_requests); });
  compute(r.ro, [&] { return runtime_overhead(r.total_overhead_joules, r.total_sut_joules); });
  compute(r.overhead_ratio_raw,
          [&] { return overhead_ratio_raw(r.total_overhead_joules, r.total_sut_joules); });
  compute(r.ru, [&] { return resource_utilization(in.timelines, in.is_sut); });
  compute(r.re, [&] { return scaling_waste(in.timelines, in.over_provision, in.is_sut); });
  compute(r.ac, [&] {
    return auxiliary_costs(r.total_sut_joules, r.total_overhead_joules, in.aux,
                           in.bytes_transferred, in.storage_gb_seconds);
  });

  try {
    const CostResult cost = total_cost(in.timelines, in.service_kinds, in.fn_usage, in.prices);
    r.tc = cost.total;
    r.consumed_cost = cost.consumed;
    compute(r.cost_per_kilorequest,
            [&] { return cost_per_kilorequest(cost.total, r.successful_requests); });
  } catch (const MetricError&) {
  }

  compute(r.fr, [&] { return failure_rate(failed, r.total_requests); });
  compute(r.rqs, [&] { return throughput(in.requests, in.window_start, in.window_end); });
  try {
    const auto lat = latency_quantiles(in.requests, {0.5, 0.95});
    r.lat_p50 = lat[0];
    r.lat_p95 = lat[1];
  } catch (const MetricError&) {
  }
  return r;
}

}  // namespace wattbench
