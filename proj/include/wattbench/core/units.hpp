#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace wattbench {

// Canonical internal units: energy in joules, power in watts, cpu in
// millicores, memory in bytes, time in UTC seconds. Conversions happen once,
// at the parsing/collector boundary.

inline constexpr double kJoulesPerWattHour = 3600.0;
inline constexpr double kBytesPerGiB = 1024.0 * 1024.0 * 1024.0;
inline constexpr double kBytesPerNetGB = 1e9;  // decimal GB for traffic

inline double wh_to_joules(double wh) { return wh * kJoulesPerWattHour; }
inline double vcpu_from_millicores(std::int64_t mc) { return static_cast<double>(mc) / 1000.0; }
inline double gb_from_bytes(std::int64_t bytes) { return static_cast<double>(bytes) / kBytesPerGiB; }

/// Parse a CPU quantity: "1500m" (millicores), "2" (cores). Throws ConfigError.
std::int64_t parse_cpu_quantity(std::string_view s);

/// Parse a memory quantity: plain bytes, or suffixed Ki/Mi/Gi (binary) and
/// K/M/G (decimal). Throws ConfigError.
std::int64_t parse_mem_quantity(std::string_view s);

/// Canonical renderings used by plan/descriptor output.
std::string render_cpu_quantity(std::int64_t millicores);
std::string render_mem_quantity(std::int64_t bytes);

}  // namespace wattbench
