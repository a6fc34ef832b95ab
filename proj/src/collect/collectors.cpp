#include "wattbench/collect/collectors.hpp"

#include <httplib.h>

#include <json.hpp>

#include <cmath>

#include "wattbench/collect/trace_csv.hpp"
#include "wattbench/collect/tsdb.hpp"
#include "wattbench/core/error.hpp"

namespace wattbench {

const char* batch_status_name(BatchStatus s) {
  switch (s) {
    case BatchStatus::ok:
      return "ok";
    case BatchStatus::partial:
      return "partial";
    case BatchStatus::failed:
      return "failed";
  }
  return "?";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CollectorBatch fail_batch(const CollectorConfig& c, double t1, const std::string& why) {
  CollectorBatch b;
  b.collector_id = c.id;
  b.polled_at = t1;
  b.status = BatchStatus::failed;
  b.diagnostic = why;
  return b;
}

void poll_tsdb(const CollectorConfig& c, double t0, double t1, CollectorBatch& b) {
  int failed_queries = 0;
  std::string first_error;
  for (const auto& q : c.queries) {
    TsdbResult result;
    try {
      // end is t1 - 1 because the window is half-open on a 1 s grid.
      result = tsdb_range_query(c.endpoint, q.query, t0, t1 - 1, 1.0);
    } catch (const HttpError& e) {
      failed_queries++;
      if (first_error.empty()) first_error = e.what();
      continue;
    }
    if (result.dropped_nonfinite > 0) b.status = BatchStatus::partial;
    for (const auto& series : result.series) {
      MeasurementSample s;
      s.layer = q.layer;
      s.kind = q.kind;
      s.source = c.id;
      s.unit = q.unit;
      auto label = [&](const char* k) {
        auto it = series.labels.find(k);
        return it == series.labels.end() ? std::string() : it->second;
      };
      s.node = label("node");
      if (s.node.empty()) s.node = label("instance");
      s.pod = label("pod");
      for (const auto& p : series.points) {
        s.ts = p.ts;
        s.value = p.value * q.scale;
        b.samples.push_back(s);
      }
    }
  }
  if (failed_queries > 0) {
    b.diagnostic = std::to_string(failed_queries) + " of " + std::to_string(c.queries.size()) +
                   " queries failed: " + first_error;
    b.status =
        failed_queries == static_cast<int>(c.queries.size()) && !c.queries.empty()
            ? BatchStatus::failed
            : BatchStatus::partial;
    if (b.status == BatchStatus::failed) b.samples.clear();
  }
}

void poll_power_meter(const CollectorConfig& c, double t1, CollectorBatch& b) {
  httplib::Client client(c.endpoint);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(10, 0);
  auto res = client.Get("/");
  if (!res) {
    b = fail_batch(c, t1, "power meter unreachable at " + c.endpoint);
    return;
  }
  if (res->status < 200 || res->status >= 300) {
    b = fail_batch(c, t1, "power meter returned HTTP " + std::to_string(res->status));
    return;
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    b = fail_batch(c, t1, "power meter body is not JSON");
    return;
  }
  if (!doc.contains("watts") || !doc.contains("ts")) {
    b = fail_batch(c, t1, "power meter body missing watts/ts");
    return;
  }
  MeasurementSample s;
  s.ts = doc["ts"].get<double>();
  s.layer = Layer::physical;
  s.source = c.id;
  // The meter owns one host; the first query's string names it.
  s.node = c.queries.empty() ? "" : c.queries[0].query;
  s.kind = SampleKind::watts;
  s.value = doc["watts"].get<double>() * (c.queries.empty() ? 1.0 : c.queries[0].scale);
  s.unit = "W";
  b.samples.push_back(std::move(s));
}

void poll_cluster_metrics(const CollectorConfig& c, double t1, CollectorBatch& b) {
  httplib::Client client(c.endpoint);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(10, 0);
  auto res = client.Get("/");
  if (!res) {
    b = fail_batch(c, t1, "cluster metrics endpoint unreachable at " + c.endpoint);
    return;
  }
  if (res->status < 200 || res->status >= 300) {
    b = fail_batch(c, t1, "cluster metrics returned HTTP " + std::to_string(res->status));
    return;
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    b = fail_batch(c, t1, "cluster metrics body is not JSON");
    return;
  }
  for (const auto& item : doc.value("items", nlohmann::json::array())) {
    MeasurementSample base;
    base.ts = item.value("ts", t1);
    base.layer = Layer::service;
    base.source = c.id;
    base.node = item.value("node", std::string());
    base.pod = item.value("pod", std::string());
    if (item.contains("cpu_millicores")) {
      auto s = base;
      s.kind = SampleKind::cpu_millicores;
      s.value = item["cpu_millicores"].get<double>();
      s.unit = "m";
      b.samples.push_back(std::move(s));
    }
    if (item.contains("mem_bytes")) {
      auto s = base;
      s.kind = SampleKind::mem_bytes;
      s.value = item["mem_bytes"].get<double>();
      s.unit = "B";
      b.samples.push_back(std::move(s));
    }
  }
}

}  // namespace

bool second_dropped(const FaultInjection& inject, int attempt, std::int64_t second) {
  if (inject.drop_seconds_fraction <= 0) return false;
  if (!inject.enabled_for(attempt)) return false;
  const std::uint64_t h = splitmix64(inject.seed ^ splitmix64(static_cast<std::uint64_t>(attempt)) ^
                                     splitmix64(static_cast<std::uint64_t>(second) + 0x51ed270b));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < inject.drop_seconds_fraction;
}

CollectorBatch poll(const CollectorConfig& config, double t0, double t1, int attempt,
                    SimSource* sim) {
  if (!(t0 < t1)) throw ConfigError("poll window must satisfy t0 < t1");
  CollectorBatch b;
  b.collector_id = config.id;
  b.polled_at = t1;

  switch (config.backend) {
    case CollectorBackend::trace_replay: {
      std::vector<MeasurementSample> all;
      try {
        all = read_trace_csv(config.endpoint);
      } catch (const DataError& e) {
        return fail_batch(config, t1, e.what());
      }
      for (auto& s : all) {
        s.source = config.id;
        b.samples.push_back(std::move(s));
      }
      break;
    }
    case CollectorBackend::tsdb_http:
      poll_tsdb(config, t0, t1, b);
      break;
    case CollectorBackend::power_meter:
      poll_power_meter(config, t1, b);
      break;
    case CollectorBackend::cluster_metrics:
      poll_cluster_metrics(config, t1, b);
      break;
    case CollectorBackend::simulator:
      if (!sim) throw ConfigError("collector '" + config.id + "' needs a simulator source");
      b.samples = sim->sample_window(config, t0, t1);
      break;
  }
  if (b.status == BatchStatus::failed) return b;

  // Window discipline: never emit outside [t0, t1).
  std::erase_if(b.samples, [&](const MeasurementSample& s) { return s.ts < t0 || s.ts >= t1; });

  if (config.inject.drop_seconds_fraction > 0 && config.inject.enabled_for(attempt)) {
    const auto before = b.samples.size();
    std::erase_if(b.samples, [&](const MeasurementSample& s) {
      return second_dropped(config.inject, attempt,
                            static_cast<std::int64_t>(std::floor(s.ts)));
    });
    if (b.samples.size() != before && b.status == BatchStatus::ok)
      b.status = BatchStatus::partial;
  }
  return b;
}

}  // namespace wattbench
