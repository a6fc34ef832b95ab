#include "wattbench/agg/energy.hpp"

#include <algorithm>

#include "wattbench/core/error.hpp"

namespace wattbench {

SutSelector make_sut_selector(const std::vector<std::string>& sut_services) {
  std::vector<std::string> services = sut_services;
  return [services](const std::string& service, Layer layer) {
    if (layer == Layer::platform || layer == Layer::isolation || layer == Layer::physical)
      return false;
    return std::find(services.begin(), services.end(), service) != services.end();
  };
}

EnergyLedger attribute_energy(const std::vector<ResourceTimeline>& timelines,
                              const SutSelector& is_sut) {
  EnergyLedger ledger;
  bool any_energy = false;
  bool any_sut_match = false;

  for (const auto& tl : timelines) {
    double joules = 0;
    bool any = false;
    for (size_t i = 0; i < tl.watts.size(); i++) {
      if (!tl.watts.has(i)) continue;  // missing seconds contribute 0 J, never interpolated
      joules += tl.watts.values[i];    // watts x 1 s
      any = true;
    }
    if (!any) continue;
    any_energy = true;

    if (tl.replica.empty()) {
      // Host-level series: per-node totals, not part of the sut/overhead split.
      ledger.node_joules[tl.node] += joules;
      ledger.layer_joules[tl.layer] += joules;
      continue;
    }
    ledger.layer_joules[tl.layer] += joules;
    if (is_sut(tl.service, tl.layer)) {
      ledger.sut_joules += joules;
      any_sut_match = true;
    } else {
      ledger.overhead_joules += joules;
    }
  }

  if (!any_energy) throw DataError("no energy source");
  if (!any_sut_match)
    ledger.warnings.push_back("sut selector matched no replica; sut energy is 0 J");
  return ledger;
}

}  // namespace wattbench
