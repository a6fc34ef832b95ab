#include "wattbench/ref/trace_gen.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <tuple>

namespace wattbench::ref {

namespace {

Series random_series(std::mt19937_64& rng, int n, int first, int last, double lo, double hi,
                     double missing_prob) {
  Series s = make_missing_series(0.0, n);
  std::uniform_real_distribution<double> value(lo, hi);
  std::uniform_real_distribution<double> gap(0.0, 1.0);
  // A light random walk keeps neighboring seconds correlated, like a real
  // gauge, while still exercising the full range over a lifespan.
  double level = value(rng);
  for (int t = first; t <= last && t < n; t++) {
    level += (value(rng) - level) * 0.25;
    if (gap(rng) < missing_prob) continue;
    s.values[static_cast<std::size_t>(t)] = level;
    s.missing[static_cast<std::size_t>(t)] = false;
  }
  return s;
}

}  // namespace

std::vector<ResourceTimeline> make_random_timelines(std::uint64_t seed,
                                                    const TraceGenConfig& config) {
  std::mt19937_64 rng(seed);
  const int n = config.seconds;
  std::uniform_int_distribution<int> replica_count(1, std::max(1, config.max_replicas));
  std::uniform_int_distribution<int> start_at(0, std::max(0, n / 3));
  std::uniform_int_distribution<int> end_at(2 * n / 3, std::max(2 * n / 3, n - 1));
  std::uniform_int_distribution<int> cpu_limit_pick(1, 4);
  std::uniform_int_distribution<int> mem_limit_pick(1, 8);

  std::vector<ResourceTimeline> out;
  for (int svc = 0; svc < config.services; svc++) {
    const std::string service = "svc-" + std::to_string(svc);
    const int replicas = replica_count(rng);
    ResourceSpec limits;
    limits.cpu_limit_millicores = 500ll * cpu_limit_pick(rng);
    limits.mem_limit_bytes = 256ll * 1024 * 1024 * mem_limit_pick(rng);
    for (int r = 0; r < replicas; r++) {
      ResourceTimeline tl;
      tl.replica = service + "-" + std::to_string(r);
      tl.service = service;
      tl.node = "node-" + std::to_string(r % 2);
      tl.layer = Layer::service;
      tl.limits = limits;
      const int first = start_at(rng);
      const int last = end_at(rng);
      // Usage may poke above the limit now and then; the cost clamp and the
      // over-provisioning fractions both need to see that case.
      tl.cpu_millicores = random_series(rng, n, first, last, 0.0,
                                        static_cast<double>(limits.cpu_limit_millicores) * 1.1,
                                        config.missing_prob);
      tl.mem_bytes = random_series(rng, n, first, last, 0.0,
                                   static_cast<double>(limits.mem_limit_bytes) * 1.1,
                                   config.missing_prob);
      tl.watts = random_series(rng, n, first, last, 1.0, 9.0, config.missing_prob);
      out.push_back(std::move(tl));
    }
  }

  if (config.platform_rows) {
    ResourceTimeline tl;
    tl.replica = "kube-system/metrics-agent-0";
    tl.service = "kube-system/metrics-agent";
    tl.node = "node-0";
    tl.layer = Layer::platform;
    tl.cpu_millicores = random_series(rng, n, 0, n - 1, 0.0, 200.0, config.missing_prob);
    tl.mem_bytes = random_series(rng, n, 0, n - 1, 0.0, 128.0 * 1024 * 1024, config.missing_prob);
    tl.watts = random_series(rng, n, 0, n - 1, 0.5, 2.0, config.missing_prob);
    out.push_back(std::move(tl));
  }
  if (config.node_row) {
    ResourceTimeline tl;
    tl.node = "node-0";
    tl.layer = Layer::physical;
    tl.cpu_millicores = make_missing_series(0.0, n);
    tl.mem_bytes = make_missing_series(0.0, n);
    tl.watts = random_series(rng, n, 0, n - 1, 30.0, 90.0, config.missing_prob);
    out.push_back(std::move(tl));
  }

  std::sort(out.begin(), out.end(), [](const ResourceTimeline& a, const ResourceTimeline& b) {
    return std::tie(a.layer, a.service, a.replica, a.node) <
           std::tie(b.layer, b.service, b.replica, b.node);
  });
  return out;
}

std::vector<RequestRecord> make_random_requests(std::uint64_t seed, int count, double window_start,
                                                double window_end) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> start(window_start, window_end);
  std::uniform_real_distribution<double> latency(0.002, 1.5);
  std::bernoulli_distribution ok(0.93);

  std::vector<RequestRecord> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; i++) {
    RequestRecord r;
    r.start = start(rng);
    r.endpoint = "/api/work";
    r.success = ok(rng);
    r.status = r.success ? 200 : 503;
    r.latency = latency(rng);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace wattbench::ref
