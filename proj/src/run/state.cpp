#include "wattbench/run/state.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>

#include "wattbench/core/error.hpp"

namespace wattbench {

namespace {

constexpr const char* kPhaseNames[] = {"pending",    "building",  "patching",
                                       "deploying",  "settling",  "loading",
                                       "collecting", "tearing_down", "exporting",
                                       "done",       "faulty",    "retried"};

}  // namespace

const char* run_phase_name(RunPhase p) { return kPhaseNames[static_cast<int>(p)]; }

RunPhase run_phase_from_name(const std::string& s) {
  for (int i = 0; i < static_cast<int>(std::size(kPhaseNames)); i++) {
    if (s == kPhaseNames[i]) return static_cast<RunPhase>(i);
  }
  throw DataError("unknown run phase '" + s + "'");
}

bool phase_transition_legal(RunPhase from, RunPhase to) {
  if (from == RunPhase::retried) return to == RunPhase::pending;
  if (to == RunPhase::retried) return from == RunPhase::faulty;
  if (to == RunPhase::faulty) return from != RunPhase::done && from != RunPhase::faulty;
  // The linear order permits forward skips but never a step back.
  return static_cast<int>(to) > static_cast<int>(from) && to <= RunPhase::done;
}

std::string render_run_event(const RunEvent& e) {
  nlohmann::json j;
  j["ts"] = e.ts;
  j["event"] = e.event;
  if (e.event != "run_started") {
    j["variant"] = e.cell.variant;
    j["workload"] = e.cell.workload;
    j["rep"] = e.cell.repetition;
    j["attempt"] = e.attempt;
  }
  if (e.event == "phase") j["phase"] = run_phase_name(e.phase);
  if (!e.state.empty()) j["state"] = e.state;
  if (!e.diagnostic.empty()) j["diagnostic"] = e.diagnostic;
  return j.dump();
}

RunEvent parse_run_event(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("bad state log line: ") + ex.what());
  }
  try {
    RunEvent e;
    e.ts = j.at("ts").get<double>();
    e.event = j.at("event").get<std::string>();
    if (e.event != "run_started") {
      e.cell.variant = j.at("variant").get<std::string>();
      e.cell.workload = j.at("workload").get<std::string>();
      e.cell.repetition = j.at("rep").get<int>();
      e.attempt = j.at("attempt").get<int>();
    }
    if (e.event == "phase") e.phase = run_phase_from_name(j.at("phase").get<std::string>());
    e.state = j.value("state", std::string());
    e.diagnostic = j.value("diagnostic", std::string());
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("bad state log line: ") + ex.what());
  }
}

StateLog::StateLog(const std::string& path) : path_(path), out_(path, std::ios::app) {
  if (!out_) throw DataError("cannot open state log '" + path + "' for append");
}

void StateLog::append(const RunEvent& e) {
  out_ << render_run_event(e) << "\n";
  out_.flush();
  if (!out_) throw DataError("write to state log '" + path_ + "' failed");
}

std::vector<RunEvent> read_state_log(const std::string& path) {
  std::ifstream in(path);
  std::vector<RunEvent> events;
  if (!in) return events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      events.push_back(parse_run_event(line));
    } catch (const DataError&) {
      // A torn final line is the expected crash artifact; anything malformed
      // earlier means the log itself is damaged.
      if (in.peek() != std::ifstream::traits_type::eof()) throw;
    }
  }
  return events;
}

bool CellHistory::completed() const {
  return std::any_of(attempts.begin(), attempts.end(),
                     [](const AttemptRecord& a) { return a.state == "done"; });
}

int CellHistory::last_attempt() const {
  int last = 0;
  for (const auto& a : attempts) last = std::max(last, a.attempt);
  return last;
}

const AttemptRecord* CellHistory::in_flight() const {
  for (const auto& a : attempts) {
    if (a.state.empty()) return &a;
  }
  return nullptr;
}

std::vector<CellHistory> fold_state_log(const std::vector<RunEvent>& events) {
  std::vector<CellHistory> cells;
  std::map<CellId, size_t> index;
  auto slot = [&](const CellId& id) -> CellHistory& {
    auto it = index.find(id);
    if (it == index.end()) {
      index.emplace(id, cells.size());
      cells.push_back(CellHistory{id, {}});
      return cells.back();
    }
    return cells[it->second];
  };
  auto attempt_slot = [](CellHistory& h, int n) -> AttemptRecord& {
    for (auto& a : h.attempts) {
      if (a.attempt == n) return a;
    }
    h.attempts.push_back(AttemptRecord{n, {}, "", ""});
    return h.attempts.back();
  };
  for (const auto& e : events) {
    if (e.event == "run_started") continue;
    auto& rec = attempt_slot(slot(e.cell), e.attempt);
    if (e.event == "phase") {
      rec.phases.emplace_back(e.phase, e.ts);
    } else if (e.event == "cell_final") {
      rec.state = e.state;
      rec.diagnostic = e.diagnostic;
    }
  }
  return cells;
}

}  // namespace wattbench
