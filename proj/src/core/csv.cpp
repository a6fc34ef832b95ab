#include "wattbench/core/csv.hpp"

#include "wattbench/core/error.hpp"

namespace wattbench {

std::vector<std::string> csv_split(const std::string& line) {
  size_t pos = 0;
  std::vector<std::string> fields;
  if (!csv_read_record(line, pos, fields)) return {};
  if (pos < line.size()) throw DataError("unexpected newline in CSV record: '" + line + "'");
  return fields;
}

bool csv_read_record(const std::string& text, size_t& pos, std::vector<std::string>& fields) {
  fields.clear();
  const size_t n = text.size();
  if (pos >= n) return false;
  std::string cur;
  bool quoted = false;
  while (pos < n) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < n && text[pos + 1] == '"') {
          cur += '"';
          pos += 2;
        } else {
          quoted = false;
          pos++;
        }
      } else {
        cur += c;
        pos++;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
      pos++;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      pos++;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < n && text[pos + 1] == '\n') pos++;
      pos++;
      fields.push_back(std::move(cur));
      return true;
    } else {
      cur += c;
      pos++;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  fields.push_back(std::move(cur));
  return true;
}

}  // namespace wattbench
