#pragma once

#include <string>
#include <vector>

#include "wattbench/agg/timeline.hpp"

namespace wattbench {

inline constexpr const char* kAggCsvHeader =
    "second,replica,service,layer,cpu_millicores,mem_bytes,watts,missing_flags";

/// Serializes timelines to the aggregated per-run CSV: one row per timeline
/// per grid second. `second` is the 0-based offset into the grid, missing
/// values render as empty fields, and missing_flags is a bitmask
/// (cpu = 1, mem = 2, watts = 4).
std::string render_agg_csv(const std::vector<ResourceTimeline>& timelines);

void write_agg_csv(const std::string& path, const std::vector<ResourceTimeline>& timelines);

}  // namespace wattbench
