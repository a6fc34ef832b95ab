#include "wattbench/core/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>

#include "wattbench/core/error.hpp"

namespace wattbench {

std::string fmt_shortest(double v) {
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string fmt_sig(double v, int sig) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", sig - 1, v);
  std::string s(buf);
  const bool neg = s[0] == '-';
  const size_t p = neg ? 1 : 0;
  std::string digits;
  digits += s[p];
  const size_t dot = s.find('.', p);
  const size_t epos = s.find('e', p);
  if (dot != std::string::npos) digits += s.substr(dot + 1, epos - dot - 1);
  const int exp = std::atoi(s.c_str() + epos + 1);
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();

  std::string out = neg ? "-" : "";
  const int ndig = static_cast<int>(digits.size());
  if (exp >= ndig - 1) {
    out += digits;
    out.append(static_cast<size_t>(exp - (ndig - 1)), '0');
  } else if (exp >= 0) {
    out += digits.substr(0, static_cast<size_t>(exp) + 1);
    out += '.';
    out += digits.substr(static_cast<size_t>(exp) + 1);
  } else {
    out += "0.";
    out.append(static_cast<size_t>(-exp - 1), '0');
    out += digits;
  }
  return out;
}

std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return std::string(buf);
}

double parse_double(std::string_view s) {
  double out = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end)
    throw DataError("not a number: '" + std::string(s) + "'");
  return out;
}

long long parse_int(std::string_view s) {
  long long out = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end)
    throw DataError("not an integer: '" + std::string(s) + "'");
  return out;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string path_slug(std::string_view name) {
  if (name.empty()) return "unnamed";
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out.push_back(safe ? c : '-');
  }
  return out;
}

}  // namespace wattbench
