#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "wattbench/agg/energy.hpp"
#include "wattbench/core/error.hpp"
#include "wattbench/core/units.hpp"
#include "wattbench/metrics/metrics.hpp"
#include "wattbench/metrics/report_json.hpp"
#include "wattbench/ref/ref_metrics.hpp"
#include "wattbench/ref/trace_gen.hpp"

using namespace wattbench;

namespace {

Series constant_series(int n, double v) {
  Series s = make_missing_series(0.0, n);
  for (int i = 0; i < n; i++) {
    s.values[static_cast<size_t>(i)] = v;
    s.missing[static_cast<size_t>(i)] = false;
  }
  return s;
}

Series series_of(const std::vector<std::optional<double>>& cells) {
  Series s = make_missing_series(0.0, static_cast<int>(cells.size()));
  for (size_t i = 0; i < cells.size(); i++) {
    if (!cells[i]) continue;
    s.values[i] = *cells[i];
    s.missing[i] = false;
  }
  return s;
}

ResourceTimeline replica_tl(const std::string& service, const std::string& replica,
                            std::int64_t cpu_limit, std::int64_t mem_limit, Series cpu, Series mem,
                            Series watts) {
  ResourceTimeline tl;
  tl.replica = replica;
  tl.service = service;
  tl.node = "node-0";
  tl.layer = Layer::service;
  tl.limits.cpu_limit_millicores = cpu_limit;
  tl.limits.mem_limit_bytes = mem_limit;
  tl.cpu_millicores = std::move(cpu);
  tl.mem_bytes = std::move(mem);
  tl.watts = std::move(watts);
  return tl;
}

std::vector<ResourceTimeline> scaled_watts(std::vector<ResourceTimeline> tls, double c) {
  for (auto& tl : tls) {
    for (auto& v : tl.watts.values) v *= c;
  }
  return tls;
}

RequestRecord req(double start, bool success, double latency) {
  RequestRecord r;
  r.start = start;
  r.endpoint = "/api/work";
  r.success = success;
  r.status = success ? 200 : 500;
  r.latency = latency;
  return r;
}

}  // namespace

TEST_CASE("request consumption divides sut energy by successes") {
  CHECK(request_consumption(3600.0, 1800) == 2.0);
  CHECK(request_consumption(0.0, 10) == 0.0);
  CHECK_THROWS_AS(request_consumption(500.0, 0), MetricError);
  CHECK_THROWS_AS(request_consumption(500.0, -3), MetricError);
}

TEST_CASE("request consumption reconstructs the energy total to rounding error") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> joules(1.0, 5e7);
  std::uniform_int_distribution<std::int64_t> successes(1, 2'000'000);
  for (int i = 0; i < 2000; i++) {
    const double sut = joules(rng);
    const std::int64_t n = successes(rng);
    const double wr = request_consumption(sut, n);
    const double back = wr * static_cast<double>(n);
    CHECK(std::abs(back - sut) <= 2 * DBL_EPSILON * sut);
  }
}

TEST_CASE("runtime overhead is the overhead share of all attributed energy") {
  CHECK(runtime_overhead(300.0, 1000.0) == doctest::Approx(300.0 / 1300.0).epsilon(1e-15));
  CHECK(runtime_overhead(0.0, 123.0) == 0.0);
  CHECK(runtime_overhead(42.0, 0.0) == 1.0);
  CHECK_THROWS_WITH_AS(runtime_overhead(0.0, 0.0), "no attributed energy", MetricError);
}

TEST_CASE("raw overhead ratio needs sut energy") {
  CHECK(overhead_ratio_raw(300.0, 1000.0) == 0.3);
  CHECK(overhead_ratio_raw(0.0, 7.0) == 0.0);
  CHECK_THROWS_AS(overhead_ratio_raw(300.0, 0.0), MetricError);
}

TEST_CASE("runtime overhead is invariant under rescaling all watts") {
  const ref::TraceGenConfig cfg;
  const auto sut = make_sut_selector({"svc-0", "svc-1"});
  for (std::uint64_t seed = 1; seed <= 40; seed++) {
    const auto tls = ref::make_random_timelines(seed, cfg);
    const auto base = attribute_energy(tls, sut);
    const double ro = runtime_overhead(base.overhead_joules, base.sut_joules);

    // Power-of-two scaling is exact in binary floating point, so the ratio
    // must come back bit-identical; arbitrary factors round the products and
    // may shift the last bit or two.
    const auto pow2 = attribute_energy(scaled_watts(tls, 8.0), sut);
    CHECK(runtime_overhead(pow2.overhead_joules, pow2.sut_joules) == ro);

    const double c = 0.37 + static_cast<double>(seed) * 0.91;
    const auto arb = attribute_energy(scaled_watts(tls, c), sut);
    CHECK(runtime_overhead(arb.overhead_joules, arb.sut_joules) ==
          doctest::Approx(ro).epsilon(1e-12));
  }
}

TEST_CASE("resource utilization averages cpu and memory against live capacity") {
  const auto sut = make_sut_selector({"svc"});
  const std::int64_t gib = 1ll << 30;

  SUBCASE("constant half usage gives exactly one half") {
    auto tls = std::vector<ResourceTimeline>{
        replica_tl("svc", "svc-0", 1000, gib, constant_series(10, 500.0),
                   constant_series(10, 0.5 * static_cast<double>(gib)), constant_series(10, 4.0))};
    CHECK(resource_utilization(tls, sut) == 0.5);
  }

  SUBCASE("scaling out at the midpoint halves the second-half ratio") {
    const double g = static_cast<double>(gib);
    auto a = replica_tl("svc", "svc-0", 1000, gib,
                        series_of({400.0, 400.0, 200.0, 200.0}),
                        series_of({0.4 * g, 0.4 * g, 0.2 * g, 0.2 * g}),
                        constant_series(4, 3.0));
    auto b = replica_tl("svc", "svc-1", 1000, gib,
                        series_of({std::nullopt, std::nullopt, 200.0, 200.0}),
                        series_of({std::nullopt, std::nullopt, 0.2 * g, 0.2 * g}),
                        series_of({std::nullopt, std::nullopt, 3.0, 3.0}));
    const double expected = (0.4 + 0.4 + 0.2 + 0.2) / 4.0;
    CHECK(resource_utilization({a, b}, sut) == expected);
  }

  SUBCASE("a second observed only through watts counts capacity with zero use") {
    auto tl = replica_tl("svc", "svc-0", 1000, 1000,
                         series_of({500.0, std::nullopt}), series_of({500.0, std::nullopt}),
                         series_of({2.0, 2.0}));
    CHECK(resource_utilization({tl}, sut) == (0.5 + 0.0) / 2.0);
  }

  SUBCASE("non-sut replicas are ignored") {
    auto app = replica_tl("svc", "svc-0", 1000, 1000, constant_series(5, 250.0),
                          constant_series(5, 250.0), constant_series(5, 1.0));
    auto infra = replica_tl("kube-system/dns", "kube-system/dns-0", 100, 100,
                            constant_series(5, 99.0), constant_series(5, 99.0),
                            constant_series(5, 1.0));
    infra.layer = Layer::platform;
    CHECK(resource_utilization({app, infra}, sut) == 0.25);
  }

  SUBCASE("a selected replica without limits is an error naming the service") {
    auto tl = replica_tl("svc", "svc-0", 0, 0, constant_series(3, 1.0), constant_series(3, 1.0),
                         constant_series(3, 1.0));
    CHECK_THROWS_WITH_AS(resource_utilization({tl}, sut), "no resource spec for service 'svc'",
                         MetricError);
  }

  SUBCASE("no live second is an error") {
    auto tl = replica_tl("svc", "svc-0", 1000, 1000, make_missing_series(0, 4),
                         make_missing_series(0, 4), make_missing_series(0, 4));
    CHECK_THROWS_AS(resource_utilization({tl}, sut), MetricError);
    CHECK_THROWS_AS(resource_utilization({}, sut), MetricError);
  }
}

TEST_CASE("scaling waste charges replicas a peer could absorb") {
  const auto sut = make_sut_selector({"svc"});
  const OverProvisionRule rule;  // 0.49 / 0.49, peer headroom required

  SUBCASE("idle replica with an able peer bills its full wattage") {
    // 10% usage on both axes for 100 s at 4 W; the peer sits at 30% with
    // ample spare capacity. Only the idle replica's wattage is known.
    auto idle = replica_tl("svc", "svc-0", 1000, 1000, constant_series(100, 100.0),
                           constant_series(100, 100.0), constant_series(100, 4.0));
    auto peer = replica_tl("svc", "svc-1", 1000, 1000, constant_series(100, 300.0),
                           constant_series(100, 300.0), make_missing_series(0, 100));
    CHECK(scaling_waste({idle, peer}, rule, sut) == 400.0);
  }

  SUBCASE("a lone replica is never waste when peer headroom is required") {
    auto only = replica_tl("svc", "svc-0", 1000, 1000, constant_series(50, 10.0),
                           constant_series(50, 10.0), constant_series(50, 4.0));
    CHECK(scaling_waste({only}, rule, sut) == 0.0);

    OverProvisionRule solo = rule;
    solo.require_peer_headroom = false;
    CHECK(scaling_waste({only}, solo, sut) == 50.0 * 4.0);
  }

  SUBCASE("replicas above either threshold are not waste") {
    auto busy_cpu = replica_tl("svc", "svc-0", 1000, 1000, constant_series(50, 600.0),
                               constant_series(50, 100.0), constant_series(50, 4.0));
    auto busy_mem = replica_tl("svc", "svc-1", 1000, 1000, constant_series(50, 100.0),
                               constant_series(50, 600.0), constant_series(50, 4.0));
    CHECK(scaling_waste({busy_cpu, busy_mem}, rule, sut) == 0.0);
  }

  SUBCASE("usage exactly at the threshold is not below it") {
    auto at = replica_tl("svc", "svc-0", 1000, 1000, constant_series(10, 490.0),
                         constant_series(10, 100.0), constant_series(10, 4.0));
    auto peer = replica_tl("svc", "svc-1", 1000, 1000, constant_series(10, 0.0),
                           constant_series(10, 0.0), make_missing_series(0, 10));
    CHECK(scaling_waste({at, peer}, rule, sut) == 0.0);
  }

  SUBCASE("peer headroom must cover the candidate's usage in both dimensions") {
    auto cand = replica_tl("svc", "svc-0", 1000, 1000, constant_series(10, 100.0),
                           constant_series(10, 100.0), constant_series(10, 2.5));

    // Spare capacity exactly equal to the candidate's usage qualifies.
    auto full_peer = replica_tl("svc", "svc-1", 1000, 1000, constant_series(10, 900.0),
                                constant_series(10, 900.0), make_missing_series(0, 10));
    CHECK(scaling_waste({cand, full_peer}, rule, sut) == 25.0);

    // One byte less spare memory and the peer can no longer absorb it.
    auto tight_peer = replica_tl("svc", "svc-1", 1000, 1000, constant_series(10, 900.0),
                                 constant_series(10, 901.0), make_missing_series(0, 10));
    CHECK(scaling_waste({cand, tight_peer}, rule, sut) == 0.0);
  }

  SUBCASE("peers of other services do not count") {
    auto a = replica_tl("svc", "svc-0", 1000, 1000, constant_series(10, 100.0),
                        constant_series(10, 100.0), constant_series(10, 4.0));
    auto other = replica_tl("other", "other-0", 1000, 1000, constant_series(10, 0.0),
                            constant_series(10, 0.0), constant_series(10, 4.0));
    const auto both = make_sut_selector({"svc", "other"});
    CHECK(scaling_waste({a, other}, rule, both) == 0.0);
  }

  SUBCASE("seconds where the peer has no readings cannot be absorbed") {
    auto cand = replica_tl("svc", "svc-0", 1000, 1000, constant_series(10, 100.0),
                           constant_series(10, 100.0), constant_series(10, 4.0));
    auto peer = replica_tl("svc", "svc-1", 1000, 1000,
                           series_of({0.0, 0.0, 0.0, std::nullopt, std::nullopt, 0.0, 0.0, 0.0,
                                      0.0, 0.0}),
                           constant_series(10, 0.0), make_missing_series(0, 10));
    CHECK(scaling_waste({cand, peer}, rule, sut) == 8.0 * 4.0);
  }

  SUBCASE("wasteful seconds with no power reading add zero joules") {
    auto cand = replica_tl("svc", "svc-0", 1000, 1000, constant_series(10, 100.0),
                           constant_series(10, 100.0),
                           series_of({4.0, 4.0, 4.0, 4.0, std::nullopt, std::nullopt, 4.0, 4.0,
                                      4.0, 4.0}));
    auto peer = replica_tl("svc", "svc-1", 1000, 1000, constant_series(10, 0.0),
                           constant_series(10, 0.0), make_missing_series(0, 10));
    CHECK(scaling_waste({cand, peer}, rule, sut) == 8.0 * 4.0);
  }
}

TEST_CASE("raising the waste thresholds never lowers the result") {
  const ref::TraceGenConfig cfg{.seconds = 60, .services = 2, .max_replicas = 3};
  const auto sut = make_sut_selector({"svc-0", "svc-1"});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> thr(0.05, 0.95);

  for (int i = 0; i < 50; i++) {
    const auto tls = ref::make_random_timelines(static_cast<std::uint64_t>(1000 + i), cfg);
    OverProvisionRule lo, hi;
    const double c1 = thr(rng), c2 = thr(rng);
    const double m1 = thr(rng), m2 = thr(rng);
    lo.cpu_threshold = std::min(c1, c2);
    hi.cpu_threshold = std::max(c1, c2);
    lo.mem_threshold = std::min(m1, m2);
    hi.mem_threshold = std::max(m1, m2);
    CHECK(scaling_waste(tls, lo, sut) <= scaling_waste(tls, hi, sut));
  }
}

TEST_CASE("auxiliary costs add facility, network, and storage energy") {
  AuxModel none;
  CHECK(auxiliary_costs(600.0, 400.0, none, 0.0, 0.0) == 0.0);

  AuxModel pue;
  pue.pue = 1.5;
  CHECK(auxiliary_costs(600.0, 400.0, pue, 0.0, 0.0) == 500.0);

  AuxModel traffic;
  traffic.network_j_per_gb = 40.0;
  traffic.storage_j_per_gb_s = 2.0;
  CHECK(auxiliary_costs(0.0, 0.0, traffic, 5e8, 7.0) == 20.0 + 14.0);

  AuxModel all;
  all.pue = 1.2;
  all.network_j_per_gb = 10.0;
  all.storage_j_per_gb_s = 1.0;
  CHECK(auxiliary_costs(900.0, 100.0, all, 2e9, 3.0) ==
        doctest::Approx(0.2 * 1000.0 + 20.0 + 3.0).epsilon(1e-12));
}

TEST_CASE("total cost bills provisioned pod capacity per live second") {
  const std::int64_t gib = 1ll << 30;
  const CostBook prices{.pod_cpu_price = 0.000011244,
                        .pod_mem_price = 0.0000012345,
                        .fn_invocation_price = 2.0e-7,
                        .fn_gbs_price = 1.6666667e-5};
  const std::map<std::string, std::string> kinds{{"svc", "pod"}};

  SUBCASE("limits times live seconds times prices") {
    auto tl = replica_tl("svc", "svc-0", 2000, 3 * gib, constant_series(900, 1000.0),
                         constant_series(900, static_cast<double>(gib)),
                         constant_series(900, 5.0));
    const auto cost = total_cost({tl}, kinds, {}, prices);
    CHECK(cost.total ==
          doctest::Approx(900.0 * (2.0 * prices.pod_cpu_price + 3.0 * prices.pod_mem_price))
              .epsilon(1e-9));
    CHECK(cost.consumed ==
          doctest::Approx(900.0 * (1.0 * prices.pod_cpu_price + 1.0 * prices.pod_mem_price))
              .epsilon(1e-9));
    CHECK(cost.consumed <= cost.total);
  }

  SUBCASE("zero live seconds bill nothing") {
    auto tl = replica_tl("svc", "svc-0", 2000, gib, make_missing_series(0, 100),
                         make_missing_series(0, 100), make_missing_series(0, 100));
    const auto cost = total_cost({tl}, kinds, {}, prices);
    CHECK(cost.total == 0.0);
    CHECK(cost.consumed == 0.0);
    CHECK(total_cost({}, kinds, {}, prices).total == 0.0);
  }

  SUBCASE("usage above the limit is billed at the limit") {
    auto tl = replica_tl("svc", "svc-0", 2000, gib, constant_series(10, 4000.0),
                         constant_series(10, 2.0 * static_cast<double>(gib)),
                         constant_series(10, 5.0));
    const auto cost = total_cost({tl}, kinds, {}, prices);
    CHECK(cost.consumed == cost.total);
  }

  SUBCASE("functions bill invocations and memory seconds, not capacity") {
    // 500 MiB at 10000 invocations of 0.2 s each; the per-second series of
    // the function's pods must not be double-billed.
    CHECK(gb_from_bytes(500ll * 1024 * 1024) == 0.48828125);
    auto tl = replica_tl("fn", "fn-0", 1000, gib, constant_series(60, 100.0),
                         constant_series(60, 1000.0), constant_series(60, 2.0));
    const std::map<std::string, std::string> fn_kinds{{"fn", "function"}};
    const std::vector<FnUsage> usage{{"fn", 10000, 10000 * 0.2 * 0.48828125}};
    const auto cost = total_cost({tl}, fn_kinds, usage, prices);
    const double expected =
        10000.0 * prices.fn_invocation_price + 976.5625 * prices.fn_gbs_price;
    CHECK(cost.total == doctest::Approx(expected).epsilon(1e-9));
    CHECK(cost.consumed == cost.total);
  }

  SUBCASE("services without a kind entry are not billed") {
    auto infra = replica_tl("kube-system/dns", "dns-0", 1000, gib, constant_series(10, 500.0),
                            constant_series(10, 500.0), constant_series(10, 1.0));
    const auto cost = total_cost({infra}, kinds, {}, prices);
    CHECK(cost.total == 0.0);
  }

  SUBCASE("an unknown deployment kind is an error naming it") {
    auto tl = replica_tl("svc", "svc-0", 2000, gib, constant_series(10, 100.0),
                         constant_series(10, 100.0), constant_series(10, 5.0));
    const std::map<std::string, std::string> bad{{"svc", "vm"}};
    CHECK_THROWS_WITH_AS(total_cost({tl}, bad, {}, prices),
                         "unpriced deployment kind 'vm' for service 'svc'", MetricError);
  }
}

TEST_CASE("provisioned cost dominates consumed cost on random traces") {
  const ref::TraceGenConfig cfg{.seconds = 90, .services = 2, .max_replicas = 3};
  const CostBook prices{.pod_cpu_price = 1.1e-5, .pod_mem_price = 1.2e-6,
                        .fn_invocation_price = 2e-7, .fn_gbs_price = 1.7e-5};
  const std::map<std::string, std::string> kinds{{"svc-0", "pod"}, {"svc-1", "pod"}};
  for (std::uint64_t seed = 500; seed < 560; seed++) {
    const auto tls = ref::make_random_timelines(seed, cfg);
    const auto cost = total_cost(tls, kinds, {}, prices);
    CHECK(cost.consumed <= cost.total);
  }
}

TEST_CASE("cost per kilorequest converts to cents per thousand successes") {
  CHECK(cost_per_kilorequest(1.0, 1000) == 100.0);
  CHECK(cost_per_kilorequest(0.58, 142000) ==
        doctest::Approx(0.58 * 100.0 * 1000.0 / 142000.0).epsilon(1e-12));
  CHECK_THROWS_AS(cost_per_kilorequest(1.0, 0), MetricError);
}

TEST_CASE("failure rate is the failed share of all requests") {
  CHECK(failure_rate(35, 1000) == 0.035);
  CHECK(failure_rate(0, 5) == 0.0);
  CHECK(failure_rate(5, 5) == 1.0);
  CHECK_THROWS_WITH_AS(failure_rate(0, 0), "empty request log", MetricError);
}

TEST_CASE("throughput counts successes starting inside the window") {
  std::vector<RequestRecord> log;
  for (int i = 0; i < 600; i++) log.push_back(req(100.0 + i * 0.1, true, 0.01));
  // Outside the window or failed: ignored.
  log.push_back(req(99.9, true, 0.01));
  log.push_back(req(160.0, true, 0.01));
  log.push_back(req(130.0, false, 0.01));
  CHECK(throughput(log, 100.0, 160.0) == 10.0);
  CHECK(throughput({}, 100.0, 160.0) == 0.0);
  CHECK(throughput(log, 300.0, 360.0) == 0.0);
  CHECK_THROWS_AS(throughput(log, 160.0, 100.0), MetricError);
  CHECK_THROWS_AS(throughput(log, 100.0, 100.0), MetricError);
}

TEST_CASE("latency quantiles use nearest rank over successes only") {
  std::vector<RequestRecord> log;
  for (int i = 1; i <= 100; i++) log.push_back(req(0.0, true, i / 1000.0));
  std::mt19937_64 rng(3);
  std::shuffle(log.begin(), log.end(), rng);
  for (int i = 0; i < 5; i++) log.push_back(req(0.0, false, 99.0));

  const auto q = latency_quantiles(log, {0.5, 0.95, 1.0, 0.004});
  CHECK(q[0] == 50 / 1000.0);
  CHECK(q[1] == 95 / 1000.0);
  CHECK(q[2] == 100 / 1000.0);
  CHECK(q[3] == 1 / 1000.0);

  const auto single = latency_quantiles({req(0, true, 0.25)}, {0.01, 0.5, 1.0});
  CHECK(single == std::vector<double>{0.25, 0.25, 0.25});

  CHECK_THROWS_AS(latency_quantiles({}, {0.5}), MetricError);
  CHECK_THROWS_AS(latency_quantiles({req(0, false, 1.0)}, {0.5}), MetricError);
  CHECK_THROWS_AS(latency_quantiles({req(0, true, 1.0)}, {0.0}), MetricError);
  CHECK_THROWS_AS(latency_quantiles({req(0, true, 1.0)}, {1.1}), MetricError);
}

TEST_CASE("optimized metrics match the naive per-second scans") {
  const ref::TraceGenConfig cfg{.seconds = 90, .services = 2, .max_replicas = 4};
  const std::vector<std::string> services{"svc-0", "svc-1"};
  const auto sut = make_sut_selector(services);
  const OverProvisionRule rule;

  for (std::uint64_t seed = 1; seed <= 300; seed++) {
    const auto tls = ref::make_random_timelines(seed, cfg);
    const auto ledger = attribute_energy(tls, sut);

    CHECK(ledger.sut_joules == ref::sut_joules(tls, sut));
    CHECK(ledger.overhead_joules == ref::overhead_joules(tls, sut));
    CHECK(runtime_overhead(ledger.overhead_joules, ledger.sut_joules) ==
          ref::runtime_overhead(tls, sut));
    CHECK(request_consumption(ledger.sut_joules, 1234) ==
          ref::request_consumption(tls, sut, 1234));
    CHECK(resource_utilization(tls, sut) == ref::resource_utilization(tls, sut));
    CHECK(scaling_waste(tls, rule, sut) == ref::scaling_waste(tls, rule, sut));

    OverProvisionRule loose;
    loose.cpu_threshold = 0.8;
    loose.mem_threshold = 0.8;
    loose.require_peer_headroom = false;
    CHECK(scaling_waste(tls, loose, sut) == ref::scaling_waste(tls, loose, sut));
  }
}

TEST_CASE("metric evaluation is deterministic across repeated runs") {
  const ref::TraceGenConfig cfg;
  MetricsInputs in;
  in.timelines = ref::make_random_timelines(99, cfg);
  in.energy = attribute_energy(in.timelines, make_sut_selector({"svc-0", "svc-1"}));
  in.requests = ref::make_random_requests(99, 5000, 0.0, 120.0);
  in.window_start = 10.0;
  in.window_end = 110.0;
  in.is_sut = make_sut_selector({"svc-0", "svc-1"});
  in.service_kinds = {{"svc-0", "pod"}, {"svc-1", "pod"}};
  in.prices = CostBook{.pod_cpu_price = 1.1e-5, .pod_mem_price = 1.2e-6};
  in.aux.pue = 1.4;
  in.bytes_transferred = 3.2e9;

  const MetricsReport a = compute_all(in);
  const MetricsReport b = compute_all(in);
  CHECK(a == b);
  const auto again = ref::make_random_timelines(99, cfg);
  CHECK(again == in.timelines);
}

TEST_CASE("compute_all degrades per metric instead of failing the report") {
  SUBCASE("no successes keeps FR at one and clears per-request metrics") {
    MetricsInputs in;
    const std::int64_t gib = 1ll << 30;
    in.timelines = {replica_tl("svc", "svc-0", 1000, gib, constant_series(10, 100.0),
                               constant_series(10, 1000.0), constant_series(10, 4.0))};
    in.energy = attribute_energy(in.timelines, make_sut_selector({"svc"}));
    in.is_sut = make_sut_selector({"svc"});
    in.window_start = 0.0;
    in.window_end = 10.0;
    for (int i = 0; i < 7; i++) in.requests.push_back(req(1.0, false, 0.5));

    const auto r = compute_all(in);
    CHECK(!r.wr.has_value());
    CHECK(!r.cost_per_kilorequest.has_value());
    CHECK(!r.lat_p50.has_value());
    CHECK(r.fr == 1.0);
    CHECK(r.rqs == 0.0);
    CHECK(r.total_requests == 7);
    CHECK(r.successful_requests == 0);
  }

  SUBCASE("platform-only energy yields full overhead and no sut metrics") {
    MetricsInputs in;
    auto infra = replica_tl("kube-system/dns", "dns-0", 100, 100, constant_series(5, 50.0),
                            constant_series(5, 50.0), constant_series(5, 2.0));
    infra.layer = Layer::platform;
    in.timelines = {infra};
    in.is_sut = make_sut_selector({"svc"});
    in.energy = attribute_energy(in.timelines, in.is_sut);
    in.window_start = 0.0;
    in.window_end = 5.0;
    in.requests = {req(1.0, true, 0.1)};

    const auto r = compute_all(in);
    CHECK(r.ro == 1.0);
    CHECK(!r.overhead_ratio_raw.has_value());
    CHECK(!r.ru.has_value());  // nothing selected is live
    CHECK(r.re == 0.0);
    CHECK(r.wr == 0.0);  // zero sut joules over one success
    CHECK(r.tc == 0.0);
    CHECK(r.fr == 0.0);
  }
}

TEST_CASE("metrics reports render to stable json and parse back") {
  SUBCASE("fixed key order and six significant digits") {
    MetricsReport r;
    r.wr = 2.0;
    r.ro = 300.0 / 1300.0;
    r.overhead_ratio_raw = 0.3;
    r.ru = 0.5;
    r.re = 400.0;
    r.ac = 123456789.0;
    r.tc = 0.58;
    r.consumed_cost = 0.16;
    r.cost_per_kilorequest = 0.000123456789;
    r.fr = 0.035;
    r.rqs = 10.0;
    r.lat_p50 = 0.05;
    r.lat_p95 = 0.095;
    r.successful_requests = 1800;
    r.total_requests = 2000;
    r.total_sut_joules = 3600.0;
    r.total_overhead_joules = 300.0;
    r.energy_coverage = 0.9875;

    const std::string expected =
        "{\n"
        "  \"wr\": 2,\n"
        "  \"ro\": 0.230769,\n"
        "  \"overhead_ratio_raw\": 0.3,\n"
        "  \"ru\": 0.5,\n"
        "  \"re\": 400,\n"
        "  \"ac\": 123457000,\n"
        "  \"tc\": 0.58,\n"
        "  \"consumed_cost\": 0.16,\n"
        "  \"cost_per_kilorequest\": 0.000123457,\n"
        "  \"fr\": 0.035,\n"
        "  \"rqs\": 10,\n"
        "  \"lat_p50\": 0.05,\n"
        "  \"lat_p95\": 0.095,\n"
        "  \"successful_requests\": 1800,\n"
        "  \"total_requests\": 2000,\n"
        "  \"total_sut_joules\": 3600,\n"
        "  \"total_overhead_joules\": 300,\n"
        "  \"energy_coverage\": 0.9875\n"
        "}\n";
    CHECK(render_metrics_json(r) == expected);
  }

  SUBCASE("unset metrics render as null and come back unset") {
    MetricsReport r;
    r.total_requests = 5;
    const std::string text = render_metrics_json(r);
    CHECK(text.find("\"wr\": null") != std::string::npos);
    const MetricsReport back = parse_metrics_json(text);
    CHECK(!back.wr.has_value());
    CHECK(!back.lat_p95.has_value());
    CHECK(back.total_requests == 5);
  }

  SUBCASE("rendering a parsed report reproduces the bytes") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mag(-12.0, 12.0);
    std::bernoulli_distribution null_one(0.2);
    for (int i = 0; i < 200; i++) {
      MetricsReport r;
      auto roll = [&](std::optional<double>& slot) {
        if (null_one(rng)) return;
        slot = std::pow(10.0, mag(rng));
      };
      roll(r.wr);
      roll(r.ro);
      roll(r.overhead_ratio_raw);
      roll(r.ru);
      roll(r.re);
      roll(r.ac);
      roll(r.tc);
      roll(r.consumed_cost);
      roll(r.cost_per_kilorequest);
      roll(r.fr);
      roll(r.rqs);
      roll(r.lat_p50);
      roll(r.lat_p95);
      r.successful_requests = static_cast<std::int64_t>(rng() % 1000000);
      r.total_requests = r.successful_requests + static_cast<std::int64_t>(rng() % 1000);
      r.total_sut_joules = std::pow(10.0, mag(rng));
      r.total_overhead_joules = std::pow(10.0, mag(rng));
      r.energy_coverage = 0.5 + 0.5 * std::uniform_real_distribution<double>(0, 1)(rng);

      const std::string once = render_metrics_json(r);
      const std::string twice = render_metrics_json(parse_metrics_json(once));
      CHECK(once == twice);
    }
  }

  SUBCASE("malformed documents are rejected") {
    CHECK_THROWS_AS(parse_metrics_json("{"), DataError);
    CHECK_THROWS_AS(parse_metrics_json("[]"), DataError);
    CHECK_THROWS_AS(parse_metrics_json("{\"wr\": 1}"), DataError);

    MetricsReport r;
    std::string text = render_metrics_json(r);
    const auto pos = text.find("\"fr\": null");
    text.replace(pos, 10, "\"fr\": \"xx\"");
    CHECK_THROWS_AS(parse_metrics_json(text), DataError);

    MetricsReport bad;
    bad.wr = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(render_metrics_json(bad), DataError);
  }
}
