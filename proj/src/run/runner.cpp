#include "wattbench/run/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "wattbench/agg/agg_csv.hpp"
#include "wattbench/agg/energy.hpp"
#include "wattbench/agg/timeline.hpp"
#include "wattbench/collect/enrich.hpp"
#include "wattbench/collect/journal.hpp"
#include "wattbench/core/format.hpp"
#include "wattbench/core/patch.hpp"
#include "wattbench/core/plan.hpp"
#include "wattbench/core/units.hpp"
#include "wattbench/metrics/metrics.hpp"
#include "wattbench/metrics/report_json.hpp"
#include "wattbench/report/compare.hpp"
#include "wattbench/report/render.hpp"
#include "wattbench/sim/topology.hpp"
#include "wattbench/workload/drive.hpp"

namespace fs = std::filesystem;

namespace wattbench {

namespace {

double wall_now() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

void append_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::app);
  if (out) out << text;
}

/// Signals that the current attempt failed in a way a retry may fix.
struct CellFault {
  std::string diagnostic;
  std::string tool_log;
};

struct Ctx {
  const ExperimentPlan* plan = nullptr;
  DeploymentDriver* driver = nullptr;
  SimDriver* sim = nullptr;            // set when the driver runs a virtual clock
  ExternalCommandDriver* external = nullptr;
  std::string run_dir;
  std::unique_ptr<StateLog> log;
  Scenario scenario;
  std::string plan_text;
  std::string scenario_text;
  double ready_timeout = 120;
  std::map<std::string, std::string> patched;  // variant name -> descriptor text
};

const std::vector<WorkloadSpec>& workloads_of(const ExperimentPlan& plan,
                                              const VariantSpec& variant) {
  return variant.workload_overrides.empty() ? plan.workloads : variant.workload_overrides;
}

std::uint64_t cell_seed(const WorkloadSpec& w, int repetition) {
  return w.seed + static_cast<std::uint64_t>(repetition - 1);
}

std::string cell_dir_of(const Ctx& c, const CellId& id) {
  return (fs::path(c.run_dir) / path_slug(id.variant) / path_slug(id.workload) /
          ("rep-" + std::to_string(id.repetition)))
      .string();
}

/// Moves a finished attempt's artifacts aside so the next attempt starts
/// clean; rep-2 becomes rep-2-attempt-1-faulty and so on.
void archive_attempt_dir(const std::string& cell_dir, int attempt, const std::string& reason) {
  const fs::path dir(cell_dir);
  if (!fs::exists(dir)) return;
  const std::string stem =
      dir.filename().string() + "-attempt-" + std::to_string(attempt) + "-" + reason;
  fs::path target = dir.parent_path() / stem;
  for (int i = 2; fs::exists(target); i++)
    target = dir.parent_path() / (stem + "-" + std::to_string(i));
  std::error_code ec;
  fs::rename(dir, target, ec);
}

// Artifact refs must survive the process for the manifest, so every build
// updates a small sidecar file.
std::map<std::string, std::string> load_artifact_refs(const std::string& run_dir) {
  std::map<std::string, std::string> refs;
  const std::string path = (fs::path(run_dir) / "artifacts.json").string();
  if (!fs::exists(path)) return refs;
  try {
    auto j = nlohmann::json::parse(read_text(path));
    for (auto it = j.begin(); it != j.end(); ++it) refs[it.key()] = it.value().get<std::string>();
  } catch (const std::exception&) {
    // A torn write loses refs, not measurements; the manifest shows blanks.
  }
  return refs;
}

void record_artifact_ref(const std::string& run_dir, const std::string& variant,
                         const std::string& ref) {
  auto refs = load_artifact_refs(run_dir);
  refs[variant] = ref;
  nlohmann::json j(refs);
  write_text((fs::path(run_dir) / "artifacts.json").string(), j.dump(2) + "\n");
}

/// The descriptor a variant actually deploys: the user's patches first, then
/// (for topology descriptors the simulator understands) the variant's
/// resource specs rewritten as patches, so the stored text alone reproduces
/// the deployment.
std::string patched_descriptor(Ctx& c, const VariantSpec& variant) {
  auto it = c.patched.find(variant.name);
  if (it != c.patched.end()) return it->second;
  const std::string original = read_text(variant.deployment_descriptor);
  std::string text = patch_descriptor(original, variant.patches);
  if (c.sim && !variant.resource_specs.empty()) {
    const Topology topo = parse_topology(text);
    std::vector<PatchOp> ops;
    for (const auto& [name, spec] : variant.resource_specs) {
      int index = -1;
      for (size_t i = 0; i < topo.services.size(); i++) {
        if (topo.services[i].name == name) index = static_cast<int>(i);
      }
      if (index < 0)
        throw ConfigError("variant '" + variant.name + "': resource spec for unknown service '" +
                          name + "'");
      const std::string base = "services[" + std::to_string(index) + "].replica.";
      ops.push_back({base + "cpu", render_cpu_quantity(spec.cpu_limit_millicores)});
      ops.push_back({base + "mem", render_mem_quantity(spec.mem_limit_bytes)});
      ops.push_back({base + "replicas_min", std::to_string(spec.replicas_min)});
      ops.push_back({base + "replicas_max", std::to_string(spec.replicas_max)});
    }
    text = patch_descriptor(text, ops);
  }
  c.patched[variant.name] = text;
  return text;
}

/// Wall-clock collection: one poller thread per collector feeding a journal
/// writer through the batch queue, running while the workload drives.
class WallCollectors {
 public:
  WallCollectors(const std::string& journal_path, const std::vector<CollectorConfig>& collectors,
                 double start_ts, int attempt)
      : journal_(journal_path) {
    writer_ = std::thread([this] {
      while (true) {
        auto batch = queue_.pop(0.25);
        if (batch)
          journal_.append(*batch);
        else if (queue_.closed())
          break;
      }
    });
    for (const auto& cfg : collectors) {
      pollers_.emplace_back([this, cfg, start_ts, attempt] {
        double last = start_ts;
        while (!stop_.load()) {
          std::this_thread::sleep_for(std::chrono::milliseconds(100));
          const double now = wall_now();
          if (now - last >= cfg.poll_interval) {
            push_window(cfg, last, now, attempt);
            last = now;
          }
        }
        const double now = wall_now();
        if (now > last) push_window(cfg, last, now, attempt);  // final sweep
      });
    }
  }

  /// Stops polling, drains the queue, and closes the journal.
  std::vector<std::string> finish() {
    stop_.store(true);
    for (auto& t : pollers_) t.join();
    queue_.close();
    writer_.join();
    journal_.close();
    std::lock_guard<std::mutex> lock(mu_);
    return failures_;
  }

 private:
  void push_window(const CollectorConfig& cfg, double t0, double t1, int attempt) {
    CollectorBatch batch;
    try {
      batch = poll(cfg, t0, t1, attempt, nullptr);
    } catch (const std::exception& e) {
      batch.collector_id = cfg.id;
      batch.polled_at = t1;
      batch.status = BatchStatus::failed;
      batch.diagnostic = e.what();
    }
    if (batch.status == BatchStatus::failed) {
      std::lock_guard<std::mutex> lock(mu_);
      failures_.push_back(cfg.id + ": " + batch.diagnostic);
    }
    queue_.push(std::move(batch));
  }

  SampleJournal journal_;
  BatchQueue queue_;
  std::vector<std::thread> pollers_;
  std::thread writer_;
  std::atomic<bool> stop_{false};
  std::mutex mu_;
  std::vector<std::string> failures_;
};

/// Everything run_attempt learns about the deployment before teardown.
struct DeployedInfo {
  TopologyMap pod_map;
  std::map<std::string, ResourceSpec> limits;
  std::map<std::string, std::string> kinds;
  std::map<std::string, std::string> routes;
  std::vector<std::string> service_names;
};

std::string route_service(const std::map<std::string, std::string>& routes,
                          const std::string& path) {
  auto it = routes.find(path);
  if (it != routes.end()) return it->second;
  it = routes.find("/");
  return it == routes.end() ? std::string() : it->second;
}

bool run_attempt(Ctx& c, const CellId& id, const VariantSpec& variant,
                 const WorkloadSpec& workload, int attempt, bool last_rep,
                 std::optional<DeployHandle>& shared) {
  const std::string cell_dir = cell_dir_of(c, id);
  fs::create_directories(cell_dir);

  RunPhase last_phase = RunPhase::pending;
  auto phase = [&](RunPhase p, const std::string& diag = "") {
    c.log->append({wall_now(), "phase", id, attempt, p, "", diag});
    last_phase = p;
  };
  auto driver_log = [&](const char* stage) {
    const std::string t = c.driver->take_transcript();
    if (!t.empty()) append_text(cell_dir + "/driver.log", "== " + std::string(stage) + " ==\n" + t);
  };

  std::optional<DeployHandle> handle;
  bool handle_torn = false;

  try {
    phase(RunPhase::building);
    const BuildArtifact artifact = c.driver->build(variant);
    write_text(cell_dir + "/build.log", artifact.log);
    driver_log("build");
    record_artifact_ref(c.run_dir, variant.name, artifact.ref);

    phase(RunPhase::patching);
    const std::string descriptor = patched_descriptor(c, variant);
    write_text(cell_dir + "/descriptor.yaml", descriptor);

    phase(RunPhase::deploying);
    if (shared) {
      handle = *shared;
    } else {
      handle = c.driver->deploy(descriptor);
    }
    c.driver->wait_ready(*handle, c.ready_timeout);
    driver_log("deploy");

    DeployedInfo info;
    info.pod_map = c.driver->topology(*handle);
    info.limits = variant.resource_specs;
    if (c.sim) {
      const Topology& topo = c.sim->deployed(*handle);
      for (const auto& svc : topo.services) {
        info.limits[svc.name] = svc.replica;
        info.service_names.push_back(svc.name);
      }
      info.kinds = service_kinds(topo);
      info.routes = topo.routes;
    }

    std::string settle_note;
    if (c.plan->workload_placement == WorkloadPlacement::cluster) {
      std::vector<std::string> candidates;
      for (const auto& [pod, pod_info] : info.pod_map) {
        (void)pod;
        if (!pod_info.node.empty()) candidates.push_back(pod_info.node);
      }
      settle_note = "workload node: " + isolate_workload_node(info.pod_map, candidates);
    }

    const bool reused = shared.has_value();
    const double settle_s = reused ? c.plan->inter_run_settle : c.plan->settle;
    phase(RunPhase::settling, settle_note);
    if (!c.driver->virtual_clock() && settle_s > 0)
      std::this_thread::sleep_for(std::chrono::duration<double>(settle_s));

    const UserSchedule schedule = build_schedule(workload);
    const std::uint64_t seed = cell_seed(workload, id.repetition);

    DriveResult drive;
    SimTrace trace;
    const std::string journal_path = cell_dir + "/journal.csv";
    std::vector<std::string> collect_failures;

    phase(RunPhase::loading);
    if (c.sim) {
      SimLoadResult r = c.sim->load(*handle, schedule, c.scenario, seed,
                                    llround(c.plan->settle));
      drive = std::move(r.drive);
      trace = std::move(r.trace);
      write_request_log(cell_dir + "/requests.csv", drive.records);
      write_text(cell_dir + "/sim_truth.json", render_sim_truth(trace.truth));
    } else {
      if (!c.external) throw CellFault{"driver offers no workload endpoint", ""};
      const std::string base_url = c.external->endpoint(*handle);
      driver_log("endpoint");
      WallCollectors collectors(journal_path, c.plan->collectors, wall_now(), attempt);
      HttpDriveConfig http;
      http.seed = seed;
      drive = drive_http(schedule, base_url, c.scenario, http);
      collect_failures = collectors.finish();
      write_request_log(cell_dir + "/requests.csv", drive.records);
    }
    if (drive.aborted)
      throw CellFault{"workload aborted: no successful responses from the deployment", ""};

    phase(RunPhase::collecting);
    if (c.sim) {
      SimTraceSource source(trace);
      SampleJournal journal(journal_path);
      for (const auto& cfg : c.plan->collectors) {
        double t = trace.base_time;
        const double end = trace.base_time + static_cast<double>(trace.seconds);
        while (t < end) {
          const double t1 = std::min(end, t + cfg.poll_interval);
          CollectorBatch batch = poll(cfg, t, t1, attempt, &source);
          if (batch.status == BatchStatus::failed)
            collect_failures.push_back(cfg.id + ": " + batch.diagnostic);
          journal.append(batch);
          t = t1;
        }
      }
      journal.close();
    }
    for (const auto& f : collect_failures)
      append_text(cell_dir + "/collect.log", "failed poll: " + f + "\n");

    if (c.plan->teardown_between_runs || last_rep) {
      phase(RunPhase::tearing_down);
      c.driver->teardown(*handle);
      handle_torn = true;
      shared.reset();
      driver_log("teardown");
    } else {
      shared = handle;  // kept for the next repetition
    }

    phase(RunPhase::exporting);
    const double w0 = drive.started + c.plan->trim_head;
    const double w1 = drive.ended - c.plan->trim_tail;
    if (!(w0 < w1)) throw CellFault{"measurement window is empty after trimming", ""};

    auto samples = read_journal(journal_path);
    enrich(samples, info.pod_map);
    for (auto& s : samples) {
      if (!s.pod.empty())
        s.layer = classify_layer(s.pod, s.service, c.plan->platform_prefixes, s.layer);
    }

    double energy_coverage = 1.0;
    bool any_energy_collector = false;
    for (const auto& cfg : c.plan->collectors) {
      const bool has_watts =
          std::any_of(cfg.queries.begin(), cfg.queries.end(),
                      [](const QuerySpec& q) { return q.kind == SampleKind::watts; });
      const double cov = coverage_fraction(samples, cfg.id, w0, w1);
      if (has_watts) {
        energy_coverage = any_energy_collector ? std::min(energy_coverage, cov) : cov;
        any_energy_collector = true;
      }
      if (cfg.mandatory && cov + 1e-12 < c.plan->coverage_threshold)
        throw CellFault{"coverage " + fmt_sig(cov, 4) + " below threshold " +
                        fmt_sig(c.plan->coverage_threshold, 4) + " for collector '" + cfg.id +
                        "'",
                        ""};
    }

    TimelineConfig grid;
    grid.t0 = w0;
    grid.t1 = w1;
    grid.cleaning = c.plan->cleaning;
    grid.limits_by_service = info.limits;
    const auto timelines = build_timelines(samples, grid);
    write_agg_csv(cell_dir + "/agg.csv", timelines);

    std::vector<std::string> sut_names = c.plan->sut_services;
    if (sut_names.empty())
      for (const auto& [name, spec] : variant.resource_specs) {
        (void)spec;
        sut_names.push_back(name);
      }
    if (sut_names.empty()) sut_names = info.service_names;

    MetricsInputs in;
    in.timelines = timelines;
    in.requests = drive.records;
    in.window_start = w0;
    in.window_end = w1;
    in.is_sut = make_sut_selector(sut_names);
    in.service_kinds = info.kinds;
    in.over_provision = c.plan->overprovision;
    in.prices = c.plan->cost_book;
    in.aux = c.plan->aux_model;
    in.energy_coverage = energy_coverage;
    bool have_energy = false;
    try {
      in.energy = attribute_energy(timelines, in.is_sut);
      have_energy = true;
    } catch (const DataError& e) {
      append_text(cell_dir + "/collect.log", std::string("energy attribution: ") + e.what() +
                                                 "\n");
    }
    for (const auto& [service, kind] : info.kinds) {
      if (kind != "function") continue;
      FnUsage usage;
      usage.service = service;
      for (const auto& r : drive.records) {
        if (r.success && r.start >= w0 && r.start < w1 &&
            route_service(info.routes, r.endpoint) == service)
          usage.invocations++;
      }
      for (const auto& tl : timelines) {
        if (tl.service != service || tl.layer != Layer::service) continue;
        for (size_t i = 0; i < tl.mem_bytes.size(); i++) {
          if (tl.mem_bytes.has(i))
            usage.gb_seconds += gb_from_bytes(llround(tl.mem_bytes.values[i]));
        }
      }
      in.fn_usage.push_back(usage);
    }

    MetricsReport report = compute_all(in);
    if (!have_energy) {
      // With no watt series at all, zero joules would be a lie: the energy
      // metrics are unknown, not free.
      report.wr.reset();
      report.ro.reset();
      report.overhead_ratio_raw.reset();
      report.re.reset();
      report.ac.reset();
    }
    write_text(cell_dir + "/metrics.json", render_metrics_json(report));

    phase(RunPhase::done);
    c.log->append({wall_now(), "cell_final", id, attempt, RunPhase::done, "done", ""});
    return true;
  } catch (const ConfigError&) {
    throw;  // plan-level mistake; retrying cannot help and the run must stop
  } catch (...) {
    std::string diagnostic;
    std::string tool_log;
    try {
      throw;
    } catch (const CellFault& f) {
      diagnostic = f.diagnostic;
      tool_log = f.tool_log;
    } catch (const DriverError& e) {
      diagnostic = e.what();
      tool_log = e.log;
    } catch (const std::exception& e) {
      diagnostic = e.what();
    } catch (...) {
      diagnostic = "unknown error";
    }
    if (handle && !handle_torn) {
      if (last_phase != RunPhase::exporting) phase(RunPhase::tearing_down);
      try {
        c.driver->teardown(*handle);
      } catch (const std::exception& e) {
        append_text(cell_dir + "/fault.log", std::string("teardown after fault failed: ") +
                                                 e.what() + "\n");
      }
      shared.reset();
      driver_log("teardown");
    }
    driver_log("fault");
    append_text(cell_dir + "/fault.log", diagnostic + "\n" + tool_log);
    phase(RunPhase::faulty, diagnostic);
    c.log->append({wall_now(), "cell_final", id, attempt, RunPhase::faulty, "faulty", diagnostic});
    archive_attempt_dir(cell_dir, attempt, "faulty");
    return false;
  }
}

void write_outputs(Ctx& c) {
  const auto cells = fold_state_log(read_state_log(c.log->path()));
  std::map<CellId, const CellHistory*> by_id;
  for (const auto& h : cells) by_id[h.cell] = &h;

  std::vector<CellOutcome> outcomes;
  nlohmann::json manifest_cells = nlohmann::json::array();
  for (const auto& variant : c.plan->variants) {
    for (const auto& workload : workloads_of(*c.plan, variant)) {
      for (int rep = 1; rep <= c.plan->repetitions; rep++) {
        const CellId id{variant.name, workload.name, rep};
        const CellHistory* hist = by_id.count(id) ? by_id.at(id) : nullptr;

        CellOutcome outcome{variant.name, workload.name, rep, false, {}};
        if (hist && hist->completed()) {
          try {
            outcome.metrics =
                parse_metrics_json(read_text(cell_dir_of(c, id) + "/metrics.json"));
            outcome.done = true;
          } catch (const std::exception&) {
            outcome.done = false;  // artifacts vanished; reported as a gap
          }
        }
        outcomes.push_back(outcome);

        nlohmann::json jc;
        jc["variant"] = id.variant;
        jc["workload"] = id.workload;
        jc["repetition"] = id.repetition;
        jc["seed"] = cell_seed(workload, rep);
        jc["state"] = outcome.done ? "done" : "faulty";
        jc["attempts"] = nlohmann::json::array();
        if (hist) {
          for (const auto& a : hist->attempts) {
            nlohmann::json ja;
            ja["attempt"] = a.attempt;
            ja["state"] = a.state.empty() ? "interrupted" : a.state;
            if (!a.diagnostic.empty()) ja["diagnostic"] = a.diagnostic;
            ja["phases"] = nlohmann::json::array();
            for (const auto& [p, ts] : a.phases)
              ja["phases"].push_back({{"phase", run_phase_name(p)}, {"ts", ts}});
            jc["attempts"].push_back(ja);
          }
        }
        manifest_cells.push_back(jc);
      }
    }
  }

  const ComparisonTable table = compile_comparison(outcomes);
  write_text((fs::path(c.run_dir) / "comparison.md").string(),
             render_comparison_markdown(table));
  write_text((fs::path(c.run_dir) / "comparison.csv").string(), render_comparison_csv(table));
  const auto svgs = render_comparison_svgs(table);
  if (!svgs.empty()) {
    fs::create_directories(fs::path(c.run_dir) / "plots");
    for (const auto& [name, svg] : svgs)
      write_text((fs::path(c.run_dir) / "plots" / name).string(), svg);
  }

  const auto refs = load_artifact_refs(c.run_dir);
  nlohmann::json m;
  m["tool"] = {{"name", "wattbench"}, {"version", kWattbenchVersion}};
  m["driver"] = c.driver->name();
  m["created"] = wall_now();
  m["plan"] = c.plan_text;
  m["plan_digest"] = fnv1a64_hex(c.plan_text);
  m["scenario"] = c.scenario_text;
  m["collectors"] = nlohmann::json::array();
  for (const auto& cfg : c.plan->collectors) {
    m["collectors"].push_back({{"id", cfg.id},
                               {"backend", collector_backend_name(cfg.backend)},
                               {"endpoint", cfg.endpoint},
                               {"poll_interval", cfg.poll_interval},
                               {"mandatory", cfg.mandatory}});
  }
  m["variants"] = nlohmann::json::object();
  for (const auto& variant : c.plan->variants) {
    std::string descriptor;
    try {
      descriptor = patched_descriptor(c, variant);
    } catch (const std::exception& e) {
      descriptor = "";
      m["variants"][variant.name]["descriptor_error"] = e.what();
    }
    m["variants"][variant.name]["descriptor"] = descriptor;
    m["variants"][variant.name]["descriptor_digest"] = fnv1a64_hex(descriptor);
    m["variants"][variant.name]["artifact_ref"] =
        refs.count(variant.name) ? refs.at(variant.name) : "";
  }
  m["cells"] = manifest_cells;
  write_text((fs::path(c.run_dir) / "manifest.json").string(), m.dump(2) + "\n");
}

RunOutcome execute(const ExperimentPlan& plan, DeploymentDriver& driver,
                   const std::string& run_dir, const RunnerOptions& opts) {
  validate_plan(plan);
  if (run_dir.empty())
    throw ConfigError("no run directory: set the plan's output_dir or pass one explicitly");

  Ctx c;
  c.plan = &plan;
  c.driver = &driver;
  c.sim = dynamic_cast<SimDriver*>(&driver);
  c.external = dynamic_cast<ExternalCommandDriver*>(&driver);
  c.run_dir = run_dir;
  c.ready_timeout = opts.ready_timeout_s;
  c.plan_text = render_plan(plan);

  fs::create_directories(run_dir);
  const std::string plan_snapshot = (fs::path(run_dir) / "plan.yaml").string();
  if (fs::exists(plan_snapshot)) {
    if (read_text(plan_snapshot) != c.plan_text)
      throw ConfigError("run directory '" + run_dir + "' holds a different plan");
  } else {
    write_text(plan_snapshot, c.plan_text);
  }

  const std::string scenario_snapshot = (fs::path(run_dir) / "scenario.yaml").string();
  if (fs::exists(scenario_snapshot)) {
    c.scenario_text = read_text(scenario_snapshot);
    c.scenario = parse_scenario(c.scenario_text);
  } else if (!plan.scenario_path.empty()) {
    c.scenario_text = read_text(plan.scenario_path);
    c.scenario = parse_scenario(c.scenario_text);
    write_text(scenario_snapshot, c.scenario_text);
  } else {
    c.scenario = default_scenario();
  }

  const std::string log_path = (fs::path(run_dir) / "state.jsonl").string();
  auto prior = fold_state_log(read_state_log(log_path));
  std::map<CellId, CellHistory> history;
  for (auto& h : prior) history[h.cell] = h;

  const bool fresh = !fs::exists(log_path) || fs::file_size(log_path) == 0;
  c.log = std::make_unique<StateLog>(log_path);
  if (fresh)
    c.log->append({wall_now(), "run_started", {}, 0, RunPhase::pending, "",
                   "plan " + fnv1a64_hex(c.plan_text)});

  // Attempts cut short by a crash are archived before anything re-executes.
  for (auto& [id, hist] : history) {
    if (const AttemptRecord* open = hist.in_flight()) {
      c.log->append({wall_now(), "cell_final", id, open->attempt, RunPhase::pending,
                     "interrupted", "process exited mid-attempt"});
      archive_attempt_dir(cell_dir_of(c, id), open->attempt, "interrupted");
      for (auto& a : hist.attempts)
        if (a.attempt == open->attempt) a.state = "interrupted";
    }
  }

  int incomplete = 0;
  for (const auto& variant : plan.variants) {
    for (const auto& workload : workloads_of(plan, variant)) {
      std::optional<DeployHandle> shared;
      for (int rep = 1; rep <= plan.repetitions; rep++) {
        const CellId id{variant.name, workload.name, rep};
        auto& hist = history[id];
        hist.cell = id;
        if (hist.completed()) continue;

        auto has_retried_marker = [&hist](int n) {
          for (const auto& a : hist.attempts) {
            if (a.attempt != n) continue;
            for (const auto& [p, ts] : a.phases) {
              (void)ts;
              if (p == RunPhase::retried) return true;
            }
          }
          return false;
        };

        bool prev_faulty = !hist.attempts.empty() && hist.attempts.back().state == "faulty";
        bool done = false;
        int attempt = hist.last_attempt() + 1;
        while (attempt <= plan.max_attempts) {
          if (prev_faulty && !has_retried_marker(attempt - 1))
            c.log->append({wall_now(), "phase", id, attempt - 1, RunPhase::retried, "", ""});
          done = run_attempt(c, id, variant, workload, attempt, rep == plan.repetitions, shared);
          hist.attempts.push_back(
              {attempt, {}, done ? "done" : "faulty", ""});
          if (done) break;
          prev_faulty = true;
          attempt++;
        }
        if (!done) incomplete++;
      }
      if (shared) {
        try {
          driver.teardown(*shared);
        } catch (const std::exception& e) {
          append_text((fs::path(run_dir) / "driver.log").string(),
                      std::string("pair teardown failed: ") + e.what() + "\n");
        }
        const std::string t = driver.take_transcript();
        if (!t.empty()) append_text((fs::path(run_dir) / "driver.log").string(), t);
      }
    }
  }

  write_outputs(c);

  RunOutcome out;
  out.run_dir = run_dir;
  out.cells = fold_state_log(read_state_log(log_path));
  out.exit_code = incomplete > 0 ? 2 : 0;
  return out;
}

}  // namespace

std::string isolate_workload_node(const TopologyMap& topology,
                                  const std::vector<std::string>& candidates) {
  std::vector<std::string> nodes = candidates;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (const auto& node : nodes) {
    if (node.empty()) continue;
    bool hosts_sut = false;
    for (const auto& [pod, info] : topology) {
      (void)pod;
      if (info.node == node &&
          (info.layer == Layer::application || info.layer == Layer::service)) {
        hosts_sut = true;
        break;
      }
    }
    if (!hosts_sut) return node;
  }
  throw ConfigError(
      "every candidate node hosts SUT replicas; run the workload generator "
      "locally (workload_placement: local)");
}

void preflight(const ExperimentPlan& plan, DeploymentDriver& driver) {
  validate_plan(plan);
  if (!plan.scenario_path.empty()) load_scenario(plan.scenario_path);
  for (const auto& variant : plan.variants) {
    std::ifstream in(variant.deployment_descriptor);
    if (!in)
      throw ConfigError("variant '" + variant.name + "': cannot read descriptor '" +
                        variant.deployment_descriptor + "'");
    if (driver.virtual_clock()) {
      std::stringstream buf;
      buf << in.rdbuf();
      Topology topo;
      try {
        topo = parse_topology(buf.str());
      } catch (const ConfigError& e) {
        throw ConfigError("variant '" + variant.name + "': " + e.what());
      }
      for (const auto& [name, spec] : variant.resource_specs) {
        (void)spec;
        const bool known =
            std::any_of(topo.services.begin(), topo.services.end(),
                        [&name](const SimService& s) { return s.name == name; });
        if (!known)
          throw ConfigError("variant '" + variant.name + "': resource spec for unknown service '" +
                            name + "'");
      }
    }
  }
  for (const auto& cfg : plan.collectors) {
    switch (cfg.backend) {
      case CollectorBackend::simulator:
        if (!driver.virtual_clock())
          throw ConfigError("collector '" + cfg.id +
                            "' uses the simulator backend but the driver is not the simulator");
        break;
      case CollectorBackend::trace_replay:
      case CollectorBackend::tsdb_http:
      case CollectorBackend::cluster_metrics:
      case CollectorBackend::power_meter: {
        // Presence probe only: one tiny window, discarded. Nothing is
        // installed on failure; the operator is told what is missing.
        const double now = wall_now();
        const CollectorBatch b = poll(cfg, now - 2, now - 1, 1, nullptr);
        if (b.status == BatchStatus::failed)
          throw ConfigError("collector '" + cfg.id + "' failed its preflight probe: " +
                            b.diagnostic);
        break;
      }
    }
  }
}

RunOutcome execute_plan(const ExperimentPlan& plan, DeploymentDriver& driver,
                        const RunnerOptions& opts) {
  return execute(plan, driver, opts.run_dir.empty() ? plan.output_dir : opts.run_dir, opts);
}

RunOutcome resume_run(const std::string& run_dir, DeploymentDriver& driver,
                      const RunnerOptions& opts) {
  const std::string snapshot = (fs::path(run_dir) / "plan.yaml").string();
  if (!fs::exists(snapshot))
    throw ConfigError("'" + run_dir + "' is not a run directory (no plan.yaml)");
  const ExperimentPlan plan = parse_plan(read_text(snapshot));
  return execute(plan, driver, run_dir, opts);
}

}  // namespace wattbench
