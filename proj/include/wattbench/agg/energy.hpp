#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wattbench/agg/timeline.hpp"

namespace wattbench {

/// Run-level energy totals in joules, split the way the metrics need them:
/// what the application itself burned (sut) versus everything around it
/// (overhead), plus per-node host totals when host-level data exists.
struct EnergyLedger {
  std::map<Layer, double> layer_joules;
  double sut_joules = 0;
  double overhead_joules = 0;
  std::map<std::string, double> node_joules;
  std::vector<std::string> warnings;

  bool operator==(const EnergyLedger&) const = default;
};

/// Decides whether a replica belongs to the system under test.
using SutSelector = std::function<bool(const std::string& service, Layer layer)>;

/// Builds a selector from the plan: the listed services (or, when empty, the
/// services with resource specs) are the SUT; platform/isolation layers never
/// are.
SutSelector make_sut_selector(const std::vector<std::string>& sut_services);

/// Integrates watts over the grid (1 s steps, missing seconds contribute
/// nothing) and books each replica to sut or overhead via the selector.
/// Node-level physical/isolation series land in node_joules. Throws DataError
/// "no energy source" when no timeline carries any watt data at all.
EnergyLedger attribute_energy(const std::vector<ResourceTimeline>& timelines,
                              const SutSelector& is_sut);

}  // namespace wattbench
