#include <algorithm>
#include <cstddef>

#include "wattbench/core/error.hpp"
#include "wattbench/core/units.hpp"
#include "wattbench/metrics/metrics.hpp"

namespace wattbench {

namespace {

// Billable seconds are those where the replica was observed at all; capacity
// that is provisioned but silent (before creation, after termination) is
// free, matching how the timelines bound liveness.
bool billable(const ResourceTimeline& tl, std::size_t t) {
  return tl.cpu_millicores.has(t) || tl.mem_bytes.has(t) || tl.watts.has(t);
}

}  // namespace

CostResult total_cost(const std::vector<ResourceTimeline>& timelines,
                      const std::map<std::string, std::string>& service_kinds,
                      const std::vector<FnUsage>& fn_usage, const CostBook& prices) {
  CostResult out;

  for (const auto& tl : timelines) {
    if (tl.replica.empty()) continue;
    const auto it = service_kinds.find(tl.service);
    if (it == service_kinds.end()) continue;  // platform pods are not billed
    if (it->second == "function") continue;   // billed from fn_usage instead
    if (it->second != "pod")
      throw MetricError("unpriced deployment kind '" + it->second + "' for service '" +
                        tl.service + "'");

    const double limit_vcpu = vcpu_from_millicores(tl.limits.cpu_limit_millicores);
    const double limit_gb = gb_from_bytes(tl.limits.mem_limit_bytes);
    const double limit_cpu_mc = static_cast<double>(tl.limits.cpu_limit_millicores);
    const double limit_mem_b = static_cast<double>(tl.limits.mem_limit_bytes);
    const double per_second = limit_vcpu * prices.pod_cpu_price + limit_gb * prices.pod_mem_price;

    for (std::size_t t = 0; t < tl.cpu_millicores.size(); t++) {
      if (!billable(tl, t)) continue;
      out.total += per_second;

      // Usage billing clamps to the limit so consumed can never exceed total.
      const double used_mc =
          tl.cpu_millicores.has(t) ? std::min(tl.cpu_millicores.values[t], limit_cpu_mc) : 0.0;
      const double used_b =
          tl.mem_bytes.has(t) ? std::min(tl.mem_bytes.values[t], limit_mem_b) : 0.0;
      out.consumed += (used_mc / 1000.0) * prices.pod_cpu_price +
                      (used_b / kBytesPerGiB) * prices.pod_mem_price;
    }
  }

  for (const auto& fu : fn_usage) {
    const double fee = static_cast<double>(fu.invocations) * prices.fn_invocation_price +
                       fu.gb_seconds * prices.fn_gbs_price;
    out.total += fee;
    out.consumed += fee;  // functions bill exactly what ran
  }
  return out;
}

}  // namespace wattbench
