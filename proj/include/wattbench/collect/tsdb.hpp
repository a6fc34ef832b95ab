#pragma once

#include <map>
#include <string>
#include <vector>

namespace wattbench {

struct TsdbPoint {
  double ts = 0;
  double value = 0;
};

struct TsdbSeries {
  std::map<std::string, std::string> labels;  // preserved verbatim for enrichment
  std::vector<TsdbPoint> points;
};

struct TsdbResult {
  std::vector<TsdbSeries> series;
  int dropped_nonfinite = 0;  // NaN/Inf points removed from the body
};

/// Decode the range-query JSON matrix envelope (status/data/resultType/result
/// with [timestamp, "value"] pairs). Non-finite values are dropped and
/// counted. Throws HttpError on a malformed body or an error status.
TsdbResult parse_tsdb_matrix(const std::string& body);

/// Run /api/v1/query_range against endpoint. step >= 1 s. Throws HttpError
/// (connection failure, non-2xx, malformed body) or ConfigError (bad step).
TsdbResult tsdb_range_query(const std::string& endpoint, const std::string& query, double start,
                            double end, double step);

}  // namespace wattbench
