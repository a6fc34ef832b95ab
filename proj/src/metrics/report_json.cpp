#include "wattbench/metrics/report_json.hpp"

#include <cmath>
#include <json.hpp>

#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"

namespace wattbench {

namespace {

std::string num(std::optional<double> v) {
  if (!v) return "null";
  if (!std::isfinite(*v)) throw DataError("non-finite metric value in report");
  return fmt_sig(*v, 6);
}

std::string num(double v) { return num(std::optional<double>(v)); }

std::optional<double> opt_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("metrics json: missing key '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw DataError(std::string("metrics json: '") + key + "' is not a number");
  return v.get<double>();
}

double must_field(const nlohmann::json& j, const char* key) {
  const auto v = opt_field(j, key);
  if (!v) throw DataError(std::string("metrics json: '") + key + "' must not be null");
  return *v;
}

std::int64_t int_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("metrics json: missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number_integer())
    throw DataError(std::string("metrics json: '") + key + "' is not an integer");
  return v.get<std::int64_t>();
}

}  // namespace

std::string render_metrics_json(const MetricsReport& r) {
  std::string out = "{\n";
  auto field = [&out](const char* key, const std::string& value, bool last = false) {
    out += "  \"";
    out += key;
    out += "\": ";
    out += value;
    out += last ? "\n" : ",\n";
  };
  field("wr", num(r.wr));
  field("ro", num(r.ro));
  field("overhead_ratio_raw", num(r.overhead_ratio_raw));
  field("ru", num(r.ru));
  field("re", num(r.re));
  field("ac", num(r.ac));
  field("tc", num(r.tc));
  field("consumed_cost", num(r.consumed_cost));
  field("cost_per_kilorequest", num(r.cost_per_kilorequest));
  field("fr", num(r.fr));
  field("rqs", num(r.rqs));
  field("lat_p50", num(r.lat_p50));
  field("lat_p95", num(r.lat_p95));
  field("successful_requests", std::to_string(r.successful_requests));
  field("total_requests", std::to_string(r.total_requests));
  field("total_sut_joules", num(r.total_sut_joules));
  field("total_overhead_joules", num(r.total_overhead_joules));
  field("energy_coverage", num(r.energy_coverage), true);
  out += "}\n";
  return out;
}

MetricsReport parse_metrics_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("metrics json: ") + e.what());
  }
  if (!j.is_object()) throw DataError("metrics json: top level must be an object");

  MetricsReport r;
  r.wr = opt_field(j, "wr");
  r.ro = opt_field(j, "ro");
  r.overhead_ratio_raw = opt_field(j, "overhead_ratio_raw");
  r.ru = opt_field(j, "ru");
  r.re = opt_field(j, "re");
  r.ac = opt_field(j, "ac");
  r.tc = opt_field(j, "tc");
  r.consumed_cost = opt_field(j, "consumed_cost");
  r.cost_per_kilorequest = opt_field(j, "cost_per_kilorequest");
  r.fr = opt_field(j, "fr");
  r.rqs = opt_field(j, "rqs");
  r.lat_p50 = opt_field(j, "lat_p50");
  r.lat_p95 = opt_field(j, "lat_p95");
  r.successful_requests = int_field(j, "successful_requests");
  r.total_requests = int_field(j, "total_requests");
  r.total_sut_joules = must_field(j, "total_sut_joules");
  r.total_overhead_joules = must_field(j, "total_overhead_joules");
  r.energy_coverage = must_field(j, "energy_coverage");
  return r;
}

}  // namespace wattbench
