#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"
#include "wattbench/core/plan.hpp"
#include "wattbench/metrics/report_json.hpp"
#include "wattbench/run/driver.hpp"
#include "wattbench/run/runner.hpp"
#include "wattbench/run/state.hpp"
#include "wattbench/workload/drive.hpp"
#include "wattbench/workload/schedule.hpp"

using namespace wattbench;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "wattbench-test-XXXXXX").string();
    REQUIRE(mkdtemp(tmpl.data()) != nullptr);
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (fs::path(path) / name).string(); }
  std::string path;
};

std::string write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

constexpr const char* kTopoYaml = R"(
nodes:
  - id: node-a
    cpu: "4"
    mem: 8Gi
    idle_watts: 40
    max_watts: 100
services:
  - name: api
    per_request_cpu_ms: 100
    mem_floor: 64Mi
    service_time: 0.05
    replica: {cpu: 1000m, mem: 256Mi, replicas_min: 1, replicas_max: 2}
    autoscaler: {target_cpu_fraction: 0.5, scale_up_delay: 5, scale_down_delay: 60}
routes:
  /: api
)";

CollectorConfig sim_collector(const std::string& id = "sim") {
  CollectorConfig c;
  c.id = id;
  c.backend = CollectorBackend::simulator;
  c.poll_interval = 5;
  c.mandatory = true;
  c.queries = {
      {"", Layer::service, SampleKind::cpu_millicores, 1.0, false, "mc"},
      {"", Layer::service, SampleKind::mem_bytes, 1.0, false, "B"},
      {"", Layer::service, SampleKind::watts, 1.0, false, "W"},
      {"", Layer::platform, SampleKind::watts, 1.0, false, "W"},
      {"", Layer::physical, SampleKind::watts, 1.0, false, "W"},
  };
  return c;
}

ExperimentPlan sim_plan(const std::string& out_dir, const std::string& descriptor) {
  ExperimentPlan p;
  VariantSpec v;
  v.name = "api-stack";
  v.source = "local";
  v.deployment_descriptor = descriptor;
  v.resource_specs["api"] = ResourceSpec{500, 128 * 1024 * 1024, 1, 2};
  p.variants.push_back(v);
  WorkloadSpec w;
  w.name = "stress";
  w.shape = WorkloadShape::stress;
  w.duration_s = 30;
  w.peak_users = 5;
  w.seed = 42;
  p.workloads.push_back(w);
  p.repetitions = 2;
  p.settle = 5;
  p.inter_run_settle = 2;
  p.collectors.push_back(sim_collector());
  p.cost_book = {2e-5, 4e-6, 1e-7, 5e-6, "USD"};
  p.sut_services = {"api"};
  p.output_dir = out_dir;
  return p;
}

/// Checks that an attempt's phase trajectory never moves backwards.
void check_phase_trajectory(const AttemptRecord& a) {
  RunPhase prev = RunPhase::pending;
  for (const auto& [p, ts] : a.phases) {
    (void)ts;
    INFO("transition " << run_phase_name(prev) << " -> " << run_phase_name(p));
    CHECK(phase_transition_legal(prev, p));
    prev = p;
  }
}

const CellHistory& cell_of(const std::vector<CellHistory>& cells, const std::string& variant,
                           const std::string& workload, int rep) {
  for (const auto& h : cells) {
    if (h.cell == CellId{variant, workload, rep}) return h;
  }
  REQUIRE(false);
  static CellHistory empty;
  return empty;
}

/// Driver whose deployments never become ready; everything else succeeds.
class NeverReadyDriver : public DeploymentDriver {
 public:
  std::string name() const override { return "stub"; }
  bool virtual_clock() const override { return false; }
  BuildArtifact build(const VariantSpec&) override { return {"stub-ref", "stub build"}; }
  DeployHandle deploy(const std::string&) override {
    deploys++;
    return {"h-" + std::to_string(deploys)};
  }
  void wait_ready(const DeployHandle&, double) override {
    throw DriverError("deployment never became ready", "probe log");
  }
  TopologyMap topology(const DeployHandle&) override { return {}; }
  void teardown(const DeployHandle&) override { teardowns++; }

  int deploys = 0;
  int teardowns = 0;
};

class TestServer {
 public:
  explicit TestServer(std::function<void(httplib::Server&)> setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("run events serialize and parse losslessly") {
  RunEvent started{1700000000.25, "run_started", {}, 0, RunPhase::pending, "", "plan abc"};
  CHECK(parse_run_event(render_run_event(started)) == started);

  RunEvent phase{1700000001.5, "phase", {"v", "w", 2}, 1, RunPhase::deploying, "", ""};
  CHECK(parse_run_event(render_run_event(phase)) == phase);

  // cell_final carries its outcome in `state`; the phase field is not part
  // of its wire format.
  RunEvent final{1700000002.0, "cell_final", {"v", "w", 2}, 1, RunPhase::pending, "faulty",
                 "build exploded"};
  CHECK(parse_run_event(render_run_event(final)) == final);

  CHECK_THROWS_AS(parse_run_event("not json"), DataError);
  CHECK_THROWS_AS(parse_run_event(R"({"ts": 1})"), DataError);
  CHECK_THROWS_AS(parse_run_event(R"({"ts": 1, "event": "phase", "variant": "v",
      "workload": "w", "rep": 1, "attempt": 1, "phase": "warming_up"})"),
                  DataError);
}

TEST_CASE("state log survives a torn final line") {
  TempDir dir;
  const std::string path = dir.file("state.jsonl");

  CHECK(read_state_log(path).empty());  // missing file is an empty history

  RunEvent e1{1.0, "phase", {"v", "w", 1}, 1, RunPhase::building, "", ""};
  RunEvent e2{2.0, "phase", {"v", "w", 1}, 1, RunPhase::patching, "", ""};
  {
    StateLog log(path);
    log.append(e1);
    log.append(e2);
  }
  CHECK(read_state_log(path) == std::vector<RunEvent>{e1, e2});

  // A crash mid-write leaves a torn tail; replay drops it quietly.
  std::ofstream(path, std::ios::app) << R"({"ts": 3, "event")";
  CHECK(read_state_log(path) == std::vector<RunEvent>{e1, e2});

  // Damage anywhere else is a real error.
  write_file(path, "garbage\n" + render_run_event(e1) + "\n");
  CHECK_THROWS_AS(read_state_log(path), DataError);
}

TEST_CASE("phase transitions move forward only") {
  CHECK(phase_transition_legal(RunPhase::pending, RunPhase::building));
  CHECK(phase_transition_legal(RunPhase::building, RunPhase::patching));
  CHECK(phase_transition_legal(RunPhase::building, RunPhase::settling));  // forward skip
  CHECK(phase_transition_legal(RunPhase::collecting, RunPhase::exporting));
  CHECK(phase_transition_legal(RunPhase::tearing_down, RunPhase::exporting));
  CHECK(phase_transition_legal(RunPhase::exporting, RunPhase::done));
  CHECK(phase_transition_legal(RunPhase::loading, RunPhase::faulty));
  CHECK(phase_transition_legal(RunPhase::faulty, RunPhase::retried));
  CHECK(phase_transition_legal(RunPhase::retried, RunPhase::pending));

  CHECK_FALSE(phase_transition_legal(RunPhase::deploying, RunPhase::building));
  CHECK_FALSE(phase_transition_legal(RunPhase::exporting, RunPhase::tearing_down));
  CHECK_FALSE(phase_transition_legal(RunPhase::done, RunPhase::faulty));
  CHECK_FALSE(phase_transition_legal(RunPhase::faulty, RunPhase::faulty));
  CHECK_FALSE(phase_transition_legal(RunPhase::done, RunPhase::retried));
  CHECK_FALSE(phase_transition_legal(RunPhase::retried, RunPhase::building));
  CHECK_FALSE(phase_transition_legal(RunPhase::building, RunPhase::pending));
}

TEST_CASE("fold_state_log groups attempts and spots in-flight ones") {
  const CellId a{"v", "w", 1};
  const CellId b{"v", "w", 2};
  std::vector<RunEvent> events = {
      {1, "run_started", {}, 0, RunPhase::pending, "", ""},
      {2, "phase", a, 1, RunPhase::building, "", ""},
      {3, "phase", a, 1, RunPhase::faulty, "", "boom"},
      {4, "cell_final", a, 1, RunPhase::faulty, "faulty", "boom"},
      {5, "phase", a, 1, RunPhase::retried, "", ""},
      {6, "phase", a, 2, RunPhase::building, "", ""},
      {7, "phase", a, 2, RunPhase::done, "", ""},
      {8, "cell_final", a, 2, RunPhase::done, "done", ""},
      {9, "phase", b, 1, RunPhase::building, "", ""},
  };
  const auto cells = fold_state_log(events);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].cell == a);  // first appearance order
  CHECK(cells[1].cell == b);

  const CellHistory& ha = cells[0];
  REQUIRE(ha.attempts.size() == 2);
  CHECK(ha.attempts[0].state == "faulty");
  CHECK(ha.attempts[0].diagnostic == "boom");
  // The retried marker lands on the attempt it closes.
  CHECK(ha.attempts[0].phases.back().first == RunPhase::retried);
  CHECK(ha.attempts[1].state == "done");
  CHECK(ha.completed());
  CHECK(ha.last_attempt() == 2);
  CHECK(ha.in_flight() == nullptr);

  const CellHistory& hb = cells[1];
  CHECK_FALSE(hb.completed());
  REQUIRE(hb.in_flight() != nullptr);
  CHECK(hb.in_flight()->attempt == 1);
}

TEST_CASE("isolate_workload_node picks the first SUT-free node") {
  TopologyMap topo;
  topo["api-0"] = {"n1", "api", Layer::service};
  topo["api-1"] = {"n3", "api", Layer::application};
  topo["platform-n2"] = {"n2", "platform", Layer::platform};
  topo["platform-n4"] = {"n4", "platform", Layer::platform};

  // n2 and n4 are both free; lexicographic order wins.
  CHECK(isolate_workload_node(topo, {"n4", "n2", "n1", "n3"}) == "n2");
  // Platform pods do not make a node busy.
  CHECK(isolate_workload_node(topo, {"n4"}) == "n4");
  // Duplicate candidates collapse.
  CHECK(isolate_workload_node(topo, {"n2", "n2"}) == "n2");

  CHECK_THROWS_WITH_AS(isolate_workload_node(topo, {"n1", "n3"}),
                       doctest::Contains("workload_placement: local"), ConfigError);
  CHECK_THROWS_AS(isolate_workload_node(topo, {}), ConfigError);
}

TEST_CASE("sim driver lifecycle") {
  TempDir dir;
  const std::string descriptor = write_file(dir.file("topo.yaml"), kTopoYaml);
  SimDriver driver;
  CHECK(driver.name() == "sim");
  CHECK(driver.virtual_clock());

  VariantSpec v;
  v.name = "api-stack";
  v.source = "local";
  v.deployment_descriptor = descriptor;

  SUBCASE("build digests the descriptor") {
    const BuildArtifact a = driver.build(v);
    CHECK(a.ref.rfind("sim-", 0) == 0);
    CHECK(driver.build(v).ref == a.ref);  // stable for identical input

    VariantSpec missing = v;
    missing.deployment_descriptor = dir.file("nope.yaml");
    CHECK_THROWS_AS(driver.build(missing), DriverError);

    VariantSpec broken = v;
    broken.deployment_descriptor = write_file(dir.file("broken.yaml"), "services: 12\n");
    CHECK_THROWS_WITH_AS(driver.build(broken), doctest::Contains("does not parse"), DriverError);
  }

  SUBCASE("deploy, topology, load, teardown") {
    const DeployHandle h = driver.deploy(read_file(descriptor));
    driver.wait_ready(h, 1.0);
    const TopologyMap pods = driver.topology(h);
    CHECK(pods.count("api-0") == 1);
    CHECK(pods.at("api-0").service == "api");

    WorkloadSpec w;
    w.name = "stress";
    w.shape = WorkloadShape::stress;
    w.duration_s = 20;
    w.peak_users = 4;
    w.seed = 9;
    const SimLoadResult r = driver.load(h, build_schedule(w), default_scenario(), 9, 6);

    // The settle seconds run on the cluster clock before the workload, so the
    // trace covers both and every request starts after the settle window.
    CHECK(r.trace.base_time == 0.0);
    CHECK(r.trace.seconds == 26);
    REQUIRE_FALSE(r.drive.records.empty());
    CHECK(r.drive.started >= 6.0);
    for (const auto& rec : r.drive.records) CHECK(rec.start >= 6.0);
    CHECK(r.trace.truth.served > 0);

    // Identical load on a fresh deployment reproduces the result exactly.
    const DeployHandle h2 = driver.deploy(read_file(descriptor));
    const SimLoadResult r2 = driver.load(h2, build_schedule(w), default_scenario(), 9, 6);
    CHECK(r2.drive == r.drive);
    CHECK(r2.trace == r.trace);

    CHECK_THROWS_AS(driver.deploy("services: []\n"), DriverError);

    driver.teardown(h);
    driver.teardown(h);  // idempotent
    CHECK_THROWS_AS(driver.topology(h), DriverError);
    CHECK_THROWS_AS(driver.load(h, build_schedule(w), default_scenario(), 9, 0), DriverError);
    driver.teardown(h2);
  }
}

TEST_CASE("external driver config parses and validates") {
  const ExternalDriverConfig cfg = parse_driver_config(R"(
build: make {variant}
deploy: kubectl apply -f {descriptor}
ready: kubectl rollout status {handle}
topology: kubectl get pods
endpoint: echo http://svc
teardown: kubectl delete -f {descriptor}
scratch_dir: /tmp
ready_poll_s: 0.5
)");
  CHECK(cfg.build_cmd == "make {variant}");
  CHECK(cfg.ready_poll_s == 0.5);
  CHECK(cfg.scratch_dir == "/tmp");

  CHECK_THROWS_AS(parse_driver_config("build: x\nbogus_key: 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_driver_config("ready_poll_s: 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_driver_config(": ["), ConfigError);
}

TEST_CASE("external driver shells out and keeps a transcript") {
  TempDir dir;
  ExternalDriverConfig cfg;
  cfg.scratch_dir = dir.path;
  cfg.ready_poll_s = 0.01;

  VariantSpec v;
  v.name = "it's odd";  // exercises shell quoting
  v.source = "src dir";
  v.deployment_descriptor = write_file(dir.file("d.yaml"), "kind: Anything\n");

  SUBCASE("build takes the last output line as the artifact ref") {
    cfg.build_cmd =
        "printf 'log line\\n' && printf 'variant=%s\\n' {variant} 1>&2 && echo image-ref-7";
    ExternalCommandDriver driver(cfg);
    const BuildArtifact a = driver.build(v);
    CHECK(a.ref == "image-ref-7");
    // stderr is folded into the same capture as stdout.
    CHECK(a.log.find("log line") != std::string::npos);
    CHECK(a.log.find("variant=it's odd") != std::string::npos);
    const std::string transcript = driver.take_transcript();
    CHECK(transcript.find("$ ") != std::string::npos);
    CHECK(driver.take_transcript().empty());  // consumed
  }

  SUBCASE("build failure carries the tool output") {
    cfg.build_cmd = "echo compile error; exit 3";
    ExternalCommandDriver driver(cfg);
    try {
      driver.build(v);
      FAIL("expected DriverError");
    } catch (const DriverError& e) {
      CHECK(std::string(e.what()).find("exit 3") != std::string::npos);
      CHECK(e.log.find("compile error") != std::string::npos);
    }
  }

  SUBCASE("deploy writes the descriptor and names the handle from stdout") {
    cfg.deploy_cmd = "cat {descriptor} >&2; echo handle-42";
    cfg.teardown_cmd = "echo torn down {handle} >> " + dir.file("teardowns.txt");
    ExternalCommandDriver driver(cfg);
    const DeployHandle h = driver.deploy("kind: Patched\n");
    CHECK(h.id == "handle-42");
    driver.wait_ready(h, 0.1);  // no ready command: instantly ready
    CHECK(driver.topology(h).empty());

    driver.teardown(h);
    driver.teardown(h);  // second call must not rerun the command
    driver.teardown({"never-deployed"});
    const std::string log = read_file(dir.file("teardowns.txt"));
    CHECK(log == "torn down handle-42\n");
  }

  SUBCASE("readiness polls until the command succeeds") {
    const std::string flag = dir.file("ready.flag");
    cfg.deploy_cmd = "echo h1";
    // Fails on the first probe, then flips itself ready.
    cfg.ready_cmd = "test -f " + flag + " || { touch " + flag + "; exit 1; }";
    ExternalCommandDriver driver(cfg);
    const DeployHandle h = driver.deploy("x: 1\n");
    driver.wait_ready(h, 5.0);
    CHECK(fs::exists(flag));
  }

  SUBCASE("readiness timeout reports the last probe output") {
    cfg.deploy_cmd = "echo h1";
    cfg.ready_cmd = "echo still waiting; false";
    ExternalCommandDriver driver(cfg);
    const DeployHandle h = driver.deploy("x: 1\n");
    try {
      driver.wait_ready(h, 0.05);
      FAIL("expected DriverError");
    } catch (const DriverError& e) {
      CHECK(std::string(e.what()).find("not ready") != std::string::npos);
      CHECK(e.log.find("still waiting") != std::string::npos);
    }
  }

  SUBCASE("topology parses pod lines and rejects junk") {
    cfg.deploy_cmd = "echo h1";
    cfg.topology_cmd =
        "printf 'api-0 node-a api service\\n\\nkepler-x node-a kepler platform\\n'";
    ExternalCommandDriver driver(cfg);
    const DeployHandle h = driver.deploy("x: 1\n");
    const TopologyMap topo = driver.topology(h);
    REQUIRE(topo.size() == 2);
    CHECK(topo.at("api-0") == PodInfo{"node-a", "api", Layer::service});
    CHECK(topo.at("kepler-x") == PodInfo{"node-a", "kepler", Layer::platform});

    cfg.topology_cmd = "echo one two";
    ExternalCommandDriver bad(cfg);
    CHECK_THROWS_AS(bad.topology(bad.deploy("x: 1\n")), DriverError);
  }

  SUBCASE("endpoint returns the printed URL") {
    cfg.deploy_cmd = "echo h1";
    cfg.endpoint_cmd = "echo resolving; echo http://127.0.0.1:8080";
    ExternalCommandDriver driver(cfg);
    const DeployHandle h = driver.deploy("x: 1\n");
    CHECK(driver.endpoint(h) == "http://127.0.0.1:8080");

    cfg.endpoint_cmd = "true";
    ExternalCommandDriver silent(cfg);
    CHECK_THROWS_AS(silent.endpoint(silent.deploy("x: 1\n")), DriverError);
  }
}

TEST_CASE("execute_plan runs every cell on the simulator and exports reports") {
  TempDir dir;
  const std::string descriptor = write_file(dir.file("topo.yaml"), kTopoYaml);
  const ExperimentPlan plan = sim_plan(dir.file("out"), descriptor);
  SimDriver driver;

  const RunOutcome out = execute_plan(plan, driver);
  CHECK(out.exit_code == 0);
  CHECK(out.run_dir == plan.output_dir);
  REQUIRE(out.cells.size() == 2);

  for (int rep = 1; rep <= 2; rep++) {
    const CellHistory& h = cell_of(out.cells, "api-stack", "stress", rep);
    REQUIRE(h.attempts.size() == 1);
    CHECK(h.attempts[0].state == "done");
    check_phase_trajectory(h.attempts[0]);

    const fs::path cell = fs::path(plan.output_dir) / "api-stack" / "stress" /
                          ("rep-" + std::to_string(rep));
    for (const char* f : {"metrics.json", "agg.csv", "journal.csv", "requests.csv",
                          "descriptor.yaml", "build.log", "sim_truth.json"}) {
      INFO("rep " << rep << " missing " << f);
      CHECK(fs::exists(cell / f));
    }
    const MetricsReport m = parse_metrics_json(read_file((cell / "metrics.json").string()));
    CHECK(m.successful_requests > 0);
    CHECK(m.wr.has_value());
    CHECK(m.ru.has_value());
    CHECK(m.tc.has_value());
    CHECK(m.energy_coverage == 1.0);

    // The stored descriptor carries the resource specs as patched values, so
    // it alone reproduces the deployment.
    const std::string patched = read_file((cell / "descriptor.yaml").string());
    CHECK(patched.find("500m") != std::string::npos);
    CHECK(patched.find("128Mi") != std::string::npos);
  }

  // Run-level outputs.
  CHECK(fs::exists(fs::path(plan.output_dir) / "comparison.md"));
  CHECK(fs::exists(fs::path(plan.output_dir) / "comparison.csv"));
  CHECK(fs::exists(fs::path(plan.output_dir) / "plots" / "wr-stress.svg"));
  CHECK(fs::exists(fs::path(plan.output_dir) / "state.jsonl"));

  const auto manifest = nlohmann::json::parse(
      read_file((fs::path(plan.output_dir) / "manifest.json").string()));
  CHECK(manifest.at("tool").at("name") == "wattbench");
  CHECK(manifest.at("driver") == "sim");
  CHECK(manifest.at("plan").get<std::string>() == render_plan(plan));
  const auto& variant = manifest.at("variants").at("api-stack");
  CHECK(variant.at("artifact_ref").get<std::string>().rfind("sim-", 0) == 0);
  CHECK(variant.at("descriptor").get<std::string>().find("500m") != std::string::npos);
  REQUIRE(manifest.at("cells").size() == 2);
  CHECK(manifest.at("cells")[0].at("seed") == 42);
  CHECK(manifest.at("cells")[1].at("seed") == 43);
  CHECK(manifest.at("cells")[0].at("state") == "done");
  CHECK(manifest.at("collectors")[0].at("id") == "sim");

  SUBCASE("rerunning a finished run re-executes nothing") {
    const RunOutcome again = execute_plan(plan, driver);
    CHECK(again.exit_code == 0);
    for (const auto& h : again.cells) REQUIRE(h.attempts.size() == 1);
  }

  SUBCASE("a different plan cannot reuse the run directory") {
    ExperimentPlan other = plan;
    other.repetitions = 1;
    CHECK_THROWS_WITH_AS(execute_plan(other, driver), doctest::Contains("different plan"),
                         ConfigError);
  }
}

TEST_CASE("identical plans produce byte-identical metrics and comparisons") {
  TempDir dir;
  const std::string descriptor = write_file(dir.file("topo.yaml"), kTopoYaml);
  ExperimentPlan plan_a = sim_plan(dir.file("out-a"), descriptor);
  ExperimentPlan plan_b = sim_plan(dir.file("out-b"), descriptor);
  SimDriver driver;
  CHECK(execute_plan(plan_a, driver).exit_code == 0);
  CHECK(execute_plan(plan_b, driver).exit_code == 0);

  auto rel = [](const std::string& root, const std::string& rel_path) {
    return read_file((fs::path(root) / rel_path).string());
  };
  for (const char* f : {"comparison.csv", "comparison.md", "api-stack/stress/rep-1/metrics.json",
                        "api-stack/stress/rep-2/metrics.json",
                        "api-stack/stress/rep-1/journal.csv",
                        "api-stack/stress/rep-1/requests.csv"}) {
    INFO("differs: " << f);
    CHECK(rel(plan_a.output_dir, f) == rel(plan_b.output_dir, f));
  }
}

TEST_CASE("cells run in plan order with repetitions kept together") {
  TempDir dir;
  const std::string descriptor = write_file(dir.file("topo.yaml"), kTopoYaml);
  ExperimentPlan plan = sim_plan(dir.file("out"), descriptor);
  WorkloadSpec second = plan.workloads[0];
  second.name = "short-stress";
  second.duration_s = 10;
  plan.workloads.push_back(second);
  SimDriver driver;
  REQUIRE(execute_plan(plan, driver).exit_code == 0);

  const auto events =
      read_state_log((fs::path(plan.output_dir) / "state.jsonl").string());
  std::vector<std::pair<std::string, int>> order;
  for (const auto& e : events) {
    if (e.event != "phase") continue;
    if (!order.empty() && order.back() == std::make_pair(e.cell.workload, e.cell.repetition))
      continue;
    order.emplace_back(e.cell.workload, e.cell.repetition);
  }
  const std::vector<std::pair<std::string, int>> expected = {
      {"stress", 1}, {"stress", 2}, {"short-stress", 1}, {"short-stress", 2}};
  CHECK(order == expected);
}

TEST_CASE("teardown between repetitions can be disabled") {
  TempDir dir;
  const std::string descriptor = write_file(dir.file("topo.yaml"), kTopoYaml);
  ExperimentPlan plan = sim_plan(dir.file("out"), descriptor);
  plan.teardown_between_runs = false;
  SimDriver driver;
  const RunOutcome out = execute_plan(plan, driver);
  REQUIRE(out.exit_code == 0);

  auto has_phase = [](const AttemptRecord& a, RunPhase p) {
    return std::any_of(a.phases.begin(), a.phases.end(),
                       [p](const auto& pair) { return pair.first == p; });
  };
  const CellHistory& r1 = cell_of(out.cells, "api-stack", "stress", 1);
  const CellHistory& r2 = cell_of(out.cells, "api-stack", "stress", 2);
  // The deployment outlives repetition 1 and is torn down after the last one.
  CHECK_FALSE(has_phase(r1.attempts[0], RunPhase::tearing_down));
  CHECK(has_phase(r2.attempts[0], RunPhase::tearing_down));
  check_phase_trajectory(r1.attempts[0]);
  check_phase_trajectory(r2.attempts[0]);
}

TEST_CASE("cells go faulty after exhausting attempts and the run exits 2") {
  TempDir dir;
  const std::string descriptor = write_file(dir.file("topo.yaml"), kTopoYaml);
  ExperimentPlan plan = sim_plan(dir.file("out"), descriptor);
  plan.repetitions = 1;
  plan.collectors.clear();  // wall-clock stub: no pollable backends
  NeverReadyDriver driver;

  const RunOutcome out = execute_plan(plan, driver, {});
  CHECK(out.exit_code == 2);
  const CellHistory& h = cell_of(out.cells, "api-stack", "stress", 1);
  REQUIRE(h.attempts.size() == 3);
  for (const auto& a : h.attempts) {
    CHECK(a.state == "faulty");
    CHECK(a.diagnostic.find("never became ready") != std::string::npos);
  }
  // Attempts 1 and 2 carry the retried marker; the last one stays faulty.
  auto retried = [](const AttemptRecord& a) {
    return !a.phases.empty() && a.phases.back().first == RunPhase::retried;
  };
  CHECK(retried(h.attempts[0]));
  CHECK(retried(h.attempts[1]));
  CHECK_FALSE(retried(h.attempts[2]));

  // Every attempt that reached deploying was torn down.
  CHECK(driver.deploys == 3);
  CHECK(driver.teardowns == 3);

  // Failed attempts are archived next to where the cell would have lived,
  // and the fault log names the problem.
  const fs::path wdir = fs::path(plan.output_dir) / "api-stack" / "stress";
  CHECK(fs::exists(wdir / "rep-1-attempt-1-faulty"));
  CHECK(fs::exists(wdir / "rep-1-attempt-2-faulty"));
  CHECK(fs::exists(wdir / "rep-1-attempt-3-faulty"));
  CHECK_FALSE(fs::exists(wdir / "rep-1"));
  const std::string fault =
      read_file((wdir / "rep-1-attempt-1-faulty" / "fault.log").string());
  CHECK(fault.find("never became ready") != std::string::npos);
  CHECK(fault.find("probe log") != std::string::npos);

  // The comparison still renders, with the gap called out.
  const std::string md =
      read_file((fs::path(plan.output_dir) / "comparison.md").string());
  CHECK(md.find("api-stack/stress repetition 1") != std::string::npos);
}

TEST_CASE("dropped energy samples fail the attempt and the retry heals it") {
  TempDir dir;
  const std::string descriptor = write_file(dir.file("topo.yaml"), kTopoYaml);
  ExperimentPlan plan = sim_plan(dir.file("out"), descriptor);
  plan.repetitions = 1;
  // First attempt loses a fifth of all collector seconds; later attempts are
  // clean, mirroring a flaky exporter that recovers.
  plan.collectors[0].inject = {0.2, 77, {1}};
  plan.coverage_threshold = 0.9;
  SimDriver driver;

  const RunOutcome out = execute_plan(plan, driver);
  CHECK(out.exit_code == 0);
  const CellHistory& h = cell_of(out.cells, "api-stack", "stress", 1);
  REQUIRE(h.attempts.size() == 2);
  CHECK(h.attempts[0].state == "faulty");
  CHECK(h.attempts[0].diagnostic.find("coverage") != std::string::npos);
  CHECK(h.attempts[1].state == "done");

  const fs::path wdir = fs::path(plan.output_dir) / "api-stack" / "stress";
  CHECK(fs::exists(wdir / "rep-1-attempt-1-faulty"));
  CHECK(fs::exists(wdir / "rep-1" / "metrics.json"));

  // The manifest archives both attempts.
  const auto manifest =
      nlohmann::json::parse(read_file((fs::path(plan.output_dir) / "manifest.json").string()));
  REQUIRE(manifest.at("cells").size() == 1);
  REQUIRE(manifest.at("cells")[0].at("attempts").size() == 2);
  CHECK(manifest.at("cells")[0].at("attempts")[0].at("state") == "faulty");
  CHECK(manifest.at("cells")[0].at("attempts")[1].at("state") == "done");
}

TEST_CASE("resume archives the interrupted attempt and finishes the plan") {
  TempDir dir;
  const std::string descriptor = write_file(dir.file("topo.yaml"), kTopoYaml);
  const ExperimentPlan plan = sim_plan(dir.file("out"), descriptor);
  const fs::path run_dir(plan.output_dir);
  const fs::path wdir = run_dir / "api-stack" / "stress";

  // Fabricate a run that died mid-way: repetition 1 finished, repetition 2
  // was loading when the process vanished.
  fs::create_directories(wdir / "rep-1");
  fs::create_directories(wdir / "rep-2");
  write_file((run_dir / "plan.yaml").string(), render_plan(plan));
  MetricsReport done_metrics;
  done_metrics.wr = 3.25;
  done_metrics.rqs = 12.0;
  done_metrics.successful_requests = 360;
  done_metrics.total_requests = 360;
  const std::string frozen = render_metrics_json(done_metrics);
  write_file((wdir / "rep-1" / "metrics.json").string(), frozen);
  write_file((wdir / "rep-2" / "journal.csv").string(), "half-written garbage");
  {
    StateLog log((run_dir / "state.jsonl").string());
    const CellId r1{"api-stack", "stress", 1};
    const CellId r2{"api-stack", "stress", 2};
    log.append({1, "run_started", {}, 0, RunPhase::pending, "", ""});
    log.append({2, "phase", r1, 1, RunPhase::building, "", ""});
    log.append({3, "phase", r1, 1, RunPhase::done, "", ""});
    log.append({4, "cell_final", r1, 1, RunPhase::done, "done", ""});
    log.append({5, "phase", r2, 1, RunPhase::loading, "", ""});
  }

  SimDriver driver;
  const RunOutcome out = resume_run(run_dir.string(), driver, {});
  CHECK(out.exit_code == 0);

  // Repetition 1 was not touched: its metrics are byte-identical.
  CHECK(read_file((wdir / "rep-1" / "metrics.json").string()) == frozen);
  const CellHistory& h1 = cell_of(out.cells, "api-stack", "stress", 1);
  CHECK(h1.attempts.size() == 1);

  // The mid-flight attempt is archived as interrupted, and the fresh attempt
  // took the next number.
  const CellHistory& h2 = cell_of(out.cells, "api-stack", "stress", 2);
  REQUIRE(h2.attempts.size() == 2);
  CHECK(h2.attempts[0].state == "interrupted");
  CHECK(h2.attempts[1].attempt == 2);
  CHECK(h2.attempts[1].state == "done");
  CHECK(fs::exists(wdir / "rep-2-attempt-1-interrupted" / "journal.csv"));
  CHECK(read_file((wdir / "rep-2-attempt-1-interrupted" / "journal.csv").string()) ==
        "half-written garbage");
  CHECK(fs::exists(wdir / "rep-2" / "metrics.json"));

  // The comparison covers both repetitions and the manifest records the
  // interruption.
  const std::string csv = read_file((run_dir / "comparison.csv").string());
  CHECK(csv.find("api-stack,stress,wr") != std::string::npos);
  const auto manifest = nlohmann::json::parse(read_file((run_dir / "manifest.json").string()));
  CHECK(manifest.at("cells")[1].at("attempts")[0].at("state") == "interrupted");

  CHECK_THROWS_WITH_AS(resume_run(dir.file("not-a-run"), driver, {}),
                       doctest::Contains("not a run directory"), ConfigError);
}

TEST_CASE("execute_plan drives a live endpoint through the external driver") {
  TempDir dir;
  std::atomic<int> hits{0};
  TestServer server([&](httplib::Server& s) {
    s.Get("/", [&](const httplib::Request&, httplib::Response& res) {
      hits++;
      res.set_content("ok", "text/plain");
    });
  });

  // A replayable trace whose timestamps predate the run: polls succeed but
  // contribute nothing inside the window, exercising the no-energy path.
  const std::string trace = write_file(
      dir.file("trace.csv"),
      "timestamp,layer,source,node,pod,kind,value,unit\n"
      "100.0,physical,ext,node-a,,watts,40,W\n");

  ExternalDriverConfig cfg;
  cfg.scratch_dir = dir.path;
  cfg.ready_poll_s = 0.01;
  cfg.build_cmd = "echo image-1";
  cfg.deploy_cmd = "echo live-1";
  cfg.endpoint_cmd = "echo " + server.endpoint();
  ExternalCommandDriver driver(cfg);

  ExperimentPlan plan;
  VariantSpec v;
  v.name = "live";
  v.source = "local";
  v.deployment_descriptor = write_file(dir.file("d.yaml"), "kind: Anything\n");
  plan.variants.push_back(v);
  WorkloadSpec w;
  w.name = "burst";
  w.shape = WorkloadShape::stress;
  w.duration_s = 3;
  w.peak_users = 2;
  w.seed = 5;
  plan.workloads.push_back(w);
  plan.repetitions = 1;
  plan.settle = 0;
  plan.scenario_path = write_file(dir.file("scenario.yaml"),
                                  "steps:\n  - path: /\n    think_time: 0.05\n");
  CollectorConfig trace_collector;
  trace_collector.id = "ext";
  trace_collector.backend = CollectorBackend::trace_replay;
  trace_collector.endpoint = trace;
  trace_collector.poll_interval = 1;
  trace_collector.mandatory = false;
  trace_collector.queries = {{"", Layer::physical, SampleKind::watts, 1.0, false, "W"}};
  plan.collectors.push_back(trace_collector);
  plan.output_dir = dir.file("out");

  const RunOutcome out = execute_plan(plan, driver);
  CHECK(out.exit_code == 0);
  CHECK(hits.load() > 0);

  const fs::path cell = fs::path(plan.output_dir) / "live" / "burst" / "rep-1";
  const MetricsReport m = parse_metrics_json(read_file((cell / "metrics.json").string()));
  CHECK(m.successful_requests > 0);
  CHECK(m.rqs.has_value());
  // No watt samples landed in the window, so energy metrics stay unset.
  CHECK_FALSE(m.wr.has_value());
  CHECK(fs::exists(cell / "journal.csv"));
  CHECK(fs::exists(cell / "driver.log"));

  const auto manifest =
      nlohmann::json::parse(read_file((fs::path(plan.output_dir) / "manifest.json").string()));
  CHECK(manifest.at("driver") == "external");
  CHECK(manifest.at("variants").at("live").at("artifact_ref") == "image-1");
  CHECK(manifest.at("scenario").get<std::string>().find("think_time") != std::string::npos);
}

TEST_CASE("preflight verifies presence without installing anything") {
  TempDir dir;
  const std::string descriptor = write_file(dir.file("topo.yaml"), kTopoYaml);
  ExperimentPlan plan = sim_plan(dir.file("out"), descriptor);
  SimDriver sim;

  CHECK_NOTHROW(preflight(plan, sim));

  SUBCASE("missing descriptor") {
    plan.variants[0].deployment_descriptor = dir.file("gone.yaml");
    CHECK_THROWS_WITH_AS(preflight(plan, sim), doctest::Contains("cannot read"), ConfigError);
  }

  SUBCASE("resource spec naming an unknown service") {
    plan.variants[0].resource_specs["ghost"] = ResourceSpec{100, 1024 * 1024, 1, 1};
    CHECK_THROWS_WITH_AS(preflight(plan, sim), doctest::Contains("ghost"), ConfigError);
  }

  SUBCASE("simulator collector needs the simulator driver") {
    NeverReadyDriver stub;
    CHECK_THROWS_WITH_AS(preflight(plan, stub), doctest::Contains("simulator"), ConfigError);
  }

  SUBCASE("unreachable wall-clock collector") {
    CollectorConfig c;
    c.id = "tsdb";
    c.backend = CollectorBackend::tsdb_http;
    c.endpoint = "http://127.0.0.1:9/api/v1/query_range";  // discard port: nothing listens
    c.poll_interval = 5;
    c.queries = {{"up", Layer::physical, SampleKind::watts, 1.0, false, "W"}};
    plan.collectors.push_back(c);
    CHECK_THROWS_WITH_AS(preflight(plan, sim), doctest::Contains("tsdb"), ConfigError);
  }

  SUBCASE("missing scenario file") {
    plan.scenario_path = dir.file("missing-scenario.yaml");
    CHECK_THROWS_AS(preflight(plan, sim), ConfigError);
  }
}
