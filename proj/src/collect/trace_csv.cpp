#include "wattbench/collect/trace_csv.hpp"

#include <fstream>
#include <sstream>

#include "wattbench/core/csv.hpp"
#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"

namespace wattbench {

std::string render_trace_csv(const std::vector<MeasurementSample>& samples) {
  std::string out = kTraceCsvHeader;
  out += "\n";
  for (const auto& s : samples) {
    out += fmt_shortest(s.ts);
    out += ',';
    out += layer_name(s.layer);
    out += ',';
    out += csv_escape(s.source);
    out += ',';
    out += csv_escape(s.node);
    out += ',';
    out += csv_escape(s.pod);
    out += ',';
    out += sample_kind_name(s.kind);
    out += ',';
    out += fmt_shortest(s.value);
    out += ',';
    out += csv_escape(s.unit);
    out += '\n';
  }
  return out;
}

std::vector<MeasurementSample> parse_trace_csv(const std::string& text) {
  size_t pos = 0;
  std::vector<std::string> fields;
  if (!csv_read_record(text, pos, fields))
    throw DataError("trace CSV is empty (missing header)");
  {
    std::string joined;
    for (size_t i = 0; i < fields.size(); i++) joined += (i ? "," : "") + fields[i];
    if (joined != kTraceCsvHeader)
      throw DataError("trace CSV header mismatch: got '" + joined + "'");
  }
  std::vector<MeasurementSample> samples;
  size_t line = 1;
  while (csv_read_record(text, pos, fields)) {
    line++;
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    if (fields.size() != 8)
      throw DataError("trace CSV line " + std::to_string(line) + ": expected 8 fields, got " +
                      std::to_string(fields.size()));
    MeasurementSample s;
    try {
      s.ts = parse_double(fields[0]);
      s.layer = layer_from_name(fields[1]);
      s.source = fields[2];
      s.node = fields[3];
      s.pod = fields[4];
      s.kind = sample_kind_from_name(fields[5]);
      s.value = parse_double(fields[6]);
      s.unit = fields[7];
    } catch (const std::runtime_error& e) {
      throw DataError("trace CSV line " + std::to_string(line) + ": " + e.what());
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<MeasurementSample> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read trace file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_trace_csv(buf.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_trace_csv(const std::string& path, const std::vector<MeasurementSample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write trace file '" + path + "'");
  out << render_trace_csv(samples);
  if (!out) throw DataError("short write to trace file '" + path + "'");
}

}  // namespace wattbench
