#include "wattbench/collect/tsdb.hpp"

#include <httplib.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>

#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"

namespace wattbench {

namespace {

std::string excerpt(const std::string& body) {
  return body.size() <= 200 ? body : body.substr(0, 200) + "...";
}

/// The wire format carries sample values as strings and allows "NaN"/"Inf",
/// which strict parse_double rejects; decode with strtod instead.
double wire_value(const std::string& s) {
  const char* c = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(c, &end);
  if (end != c + s.size() || s.empty())
    throw HttpError("bad sample value '" + s + "'", 200, s);
  return v;
}

}  // namespace

TsdbResult parse_tsdb_matrix(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw HttpError(std::string("tsdb response is not JSON: ") + e.what(), 200, excerpt(body));
  }
  if (!doc.is_object() || !doc.contains("status"))
    throw HttpError("tsdb response missing status", 200, excerpt(body));
  if (doc["status"] != "success") {
    const std::string err = doc.value("error", std::string("unknown error"));
    throw HttpError("tsdb query failed: " + err, 200, excerpt(body));
  }
  const auto& data = doc["data"];
  if (!data.is_object() || data.value("resultType", "") != "matrix")
    throw HttpError("tsdb response is not a matrix", 200, excerpt(body));

  TsdbResult out;
  for (const auto& entry : data["result"]) {
    TsdbSeries series;
    if (entry.contains("metric"))
      for (const auto& [k, v] : entry["metric"].items())
        series.labels[k] = v.get<std::string>();
    for (const auto& pair : entry["values"]) {
      if (!pair.is_array() || pair.size() != 2)
        throw HttpError("tsdb value pair malformed", 200, excerpt(body));
      const double ts = pair[0].get<double>();
      const double v = wire_value(pair[1].get<std::string>());
      if (!std::isfinite(v)) {
        out.dropped_nonfinite++;
        continue;
      }
      series.points.push_back({ts, v});
    }
    out.series.push_back(std::move(series));
  }
  return out;
}

TsdbResult tsdb_range_query(const std::string& endpoint, const std::string& query, double start,
                            double end, double step) {
  if (step < 1) throw ConfigError("tsdb range query step must be >= 1 s");
  httplib::Client client(endpoint);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(10, 0);
  const httplib::Params params = {
      {"query", query},
      {"start", fmt_shortest(start)},
      {"end", fmt_shortest(end)},
      {"step", fmt_shortest(step)},
  };
  auto res = client.Get("/api/v1/query_range", params, httplib::Headers{});
  if (!res)
    throw HttpError("tsdb unreachable at " + endpoint + ": " + httplib::to_string(res.error()), 0,
                    "");
  if (res->status < 200 || res->status >= 300)
    throw HttpError("tsdb returned HTTP " + std::to_string(res->status), res->status,
                    excerpt(res->body));
  return parse_tsdb_matrix(res->body);
}

}  // namespace wattbench
