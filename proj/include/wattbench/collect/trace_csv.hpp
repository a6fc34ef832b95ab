#pragma once

#include <string>
#include <vector>

#include "wattbench/core/types.hpp"

namespace wattbench {

inline constexpr const char* kTraceCsvHeader = "timestamp,layer,source,node,pod,kind,value,unit";

/// Serialize samples to the trace CSV schema (header + one row per sample).
/// Numbers use the shortest round-trip rendering, so parse followed by render
/// reproduces a canonically written file byte for byte. The in-memory-only
/// attribution fields (service, unattributed) are not part of the schema.
std::string render_trace_csv(const std::vector<MeasurementSample>& samples);

/// Parse trace CSV text. Throws DataError on schema or value problems,
/// naming the line number.
std::vector<MeasurementSample> parse_trace_csv(const std::string& text);

std::vector<MeasurementSample> read_trace_csv(const std::string& path);
void write_trace_csv(const std::string& path, const std::vector<MeasurementSample>& samples);

}  // namespace wattbench
