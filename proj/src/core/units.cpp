#include "wattbench/core/units.hpp"

#include <cctype>
#include <cmath>

#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"

namespace wattbench {

namespace {

std::pair<double, std::string> split_quantity(std::string_view s) {
  size_t i = 0;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.' ||
                          s[i] == '-' || s[i] == '+'))
    i++;
  if (i == 0) throw ConfigError("bad quantity: '" + std::string(s) + "'");
  double num = 0;
  try {
    num = parse_double(s.substr(0, i));
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return {num, std::string(s.substr(i))};
}

}  // namespace

std::int64_t parse_cpu_quantity(std::string_view s) {
  auto [num, suffix] = split_quantity(s);
  double mc = 0;
  if (suffix.empty())
    mc = num * 1000.0;  // cores
  else if (suffix == "m")
    mc = num;
  else
    throw ConfigError("bad cpu quantity suffix '" + suffix + "'");
  if (mc <= 0 || std::floor(mc) != mc)
    throw ConfigError("cpu quantity must be a positive whole number of millicores: '" +
                      std::string(s) + "'");
  return static_cast<std::int64_t>(mc);
}

std::int64_t parse_mem_quantity(std::string_view s) {
  auto [num, suffix] = split_quantity(s);
  double mult = 1;
  if (suffix.empty())
    mult = 1;
  else if (suffix == "Ki")
    mult = 1024.0;
  else if (suffix == "Mi")
    mult = 1024.0 * 1024.0;
  else if (suffix == "Gi")
    mult = kBytesPerGiB;
  else if (suffix == "K")
    mult = 1e3;
  else if (suffix == "M")
    mult = 1e6;
  else if (suffix == "G")
    mult = 1e9;
  else
    throw ConfigError("bad memory quantity suffix '" + suffix + "'");
  const double bytes = num * mult;
  if (bytes <= 0 || std::floor(bytes) != bytes)
    throw ConfigError("memory quantity must be a positive whole number of bytes: '" +
                      std::string(s) + "'");
  return static_cast<std::int64_t>(bytes);
}

std::string render_cpu_quantity(std::int64_t millicores) {
  return std::to_string(millicores) + "m";
}

std::string render_mem_quantity(std::int64_t bytes) {
  constexpr std::int64_t mi = 1024 * 1024;
  if (bytes % mi == 0) return std::to_string(bytes / mi) + "Mi";
  return std::to_string(bytes);
}

}  // namespace wattbench
