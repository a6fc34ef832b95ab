#include "wattbench/agg/agg_csv.hpp"

#include <fstream>

#include "wattbench/core/csv.hpp"
#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"

namespace wattbench {

std::string render_agg_csv(const std::vector<ResourceTimeline>& timelines) {
  std::string out = kAggCsvHeader;
  out += "\n";
  for (const auto& tl : timelines) {
    const size_t n = tl.watts.size();
    for (size_t s = 0; s < n; s++) {
      int flags = 0;
      if (!tl.cpu_millicores.has(s)) flags |= 1;
      if (!tl.mem_bytes.has(s)) flags |= 2;
      if (!tl.watts.has(s)) flags |= 4;
      out += std::to_string(s);
      out += ',';
      out += csv_escape(tl.replica);
      out += ',';
      out += csv_escape(tl.service);
      out += ',';
      out += layer_name(tl.layer);
      out += ',';
      if (tl.cpu_millicores.has(s)) out += fmt_shortest(tl.cpu_millicores.values[s]);
      out += ',';
      if (tl.mem_bytes.has(s)) out += fmt_shortest(tl.mem_bytes.values[s]);
      out += ',';
      if (tl.watts.has(s)) out += fmt_shortest(tl.watts.values[s]);
      out += ',';
      out += std::to_string(flags);
      out += '\n';
    }
  }
  return out;
}

void write_agg_csv(const std::string& path, const std::vector<ResourceTimeline>& timelines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write aggregated CSV '" + path + "'");
  out << render_agg_csv(timelines);
  if (!out) throw DataError("short write to aggregated CSV '" + path + "'");
}

}  // namespace wattbench
