#include <fstream>
#include <sstream>

#include "wattbench/core/format.hpp"
#include "wattbench/run/driver.hpp"
#include "wattbench/sim/topology.hpp"

namespace wattbench {

namespace {

// Shifts a virtual target's clock so a drive that counts from zero lands
// after the settle period on the cluster's own timeline.
class OffsetTarget : public VirtualTarget {
 public:
  OffsetTarget(VirtualTarget& inner, std::int64_t offset) : inner_(&inner), offset_(offset) {}

  void begin_second(std::int64_t t) override { inner_->begin_second(t + offset_); }
  void end_second(std::int64_t t) override { inner_->end_second(t + offset_); }
  SubmitResult submit(double now, const ScenarioStep& step) override {
    return inner_->submit(now + static_cast<double>(offset_), step);
  }

 private:
  VirtualTarget* inner_;
  std::int64_t offset_;
};

}  // namespace

BuildArtifact SimDriver::build(const VariantSpec& variant) {
  std::ifstream in(variant.deployment_descriptor);
  if (!in)
    throw DriverError("cannot read descriptor '" + variant.deployment_descriptor + "'",
                      "descriptor file missing or unreadable\n");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string log = "descriptor " + variant.deployment_descriptor + "\n";
  try {
    parse_topology(buf.str());
  } catch (const ConfigError& e) {
    throw DriverError("descriptor for variant '" + variant.name + "' does not parse: " + e.what(),
                      log + e.what() + "\n");
  }
  BuildArtifact a;
  a.ref = "sim-" + fnv1a64_hex(buf.str());
  a.log = log + "validated, artifact ref sim-" + fnv1a64_hex(buf.str()) + "\n";
  return a;
}

DeployHandle SimDriver::deploy(const std::string& descriptor_text) {
  Topology topo;
  try {
    topo = parse_topology(descriptor_text);
  } catch (const ConfigError& e) {
    throw DriverError(std::string("patched descriptor does not parse: ") + e.what());
  }
  DeployHandle h{"sim-" + std::to_string(next_id_++)};
  live_.emplace(h.id, std::move(topo));
  return h;
}

void SimDriver::wait_ready(const DeployHandle& handle, double timeout_s) {
  (void)timeout_s;  // a parsed topology serves immediately
  find(handle);
}

TopologyMap SimDriver::topology(const DeployHandle& handle) { return sim_pod_map(find(handle)); }

void SimDriver::teardown(const DeployHandle& handle) { live_.erase(handle.id); }

SimLoadResult SimDriver::load(const DeployHandle& handle, const UserSchedule& schedule,
                              const Scenario& scenario, std::uint64_t seed,
                              std::int64_t settle_s) {
  const Topology& topo = find(handle);
  SimCluster cluster(topo, seed, 0.0);
  for (std::int64_t t = 0; t < settle_s; t++) cluster.step(0);
  OffsetTarget shifted(cluster, settle_s);
  SimLoadResult out;
  out.drive =
      drive_virtual(schedule, shifted, scenario, seed, static_cast<double>(settle_s));
  out.trace = cluster.finish();
  return out;
}

const Topology& SimDriver::deployed(const DeployHandle& handle) const { return find(handle); }

const Topology& SimDriver::find(const DeployHandle& handle) const {
  auto it = live_.find(handle.id);
  if (it == live_.end()) throw DriverError("unknown deployment handle '" + handle.id + "'");
  return it->second;
}

}  // namespace wattbench
