#pragma once

#include <string>
#include <vector>

namespace wattbench {

/// RFC-4180 field escaping: quote when the field contains a comma, quote,
/// CR or LF; embedded quotes are doubled.
inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

/// Splits one logical CSV record. The caller must pass a full record (quoted
/// newlines already joined); see csv_read_record.
std::vector<std::string> csv_split(const std::string& line);

/// Reads the next logical record from text starting at pos (handles quoted
/// fields spanning newlines). Returns false at end of input; advances pos.
bool csv_read_record(const std::string& text, size_t& pos, std::vector<std::string>& fields);

}  // namespace wattbench
