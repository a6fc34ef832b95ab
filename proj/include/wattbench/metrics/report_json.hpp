#pragma once

#include <string>

#include "wattbench/metrics/metrics.hpp"

namespace wattbench {

/// Serializes a report with a fixed key order and 6-significant-digit decimal
/// values (never scientific notation), so equal reports render to equal
/// bytes. Unset metrics render as null. Throws DataError on non-finite
/// values.
std::string render_metrics_json(const MetricsReport& r);

/// Inverse of render_metrics_json. Rendering a parsed report reproduces the
/// input bytes, which is what lets resumed runs emit identical files. Throws
/// DataError on malformed input or missing keys.
MetricsReport parse_metrics_json(const std::string& text);

}  // namespace wattbench
