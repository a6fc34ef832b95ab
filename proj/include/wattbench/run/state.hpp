#pragma once

#include <compare>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace wattbench {

/// Lifecycle of one cell attempt. The order below is the execution order;
/// faulty can interrupt anywhere after pending, and retried closes a faulty
/// attempt that a fresh one replaces.
enum class RunPhase {
  pending,
  building,
  patching,
  deploying,
  settling,
  loading,
  collecting,
  tearing_down,
  exporting,
  done,
  faulty,
  retried
};

const char* run_phase_name(RunPhase p);
RunPhase run_phase_from_name(const std::string& s);

/// True when `to` may directly follow `from` within one attempt. Forward
/// skips are legal (a reused deployment goes straight from building to
/// settling); moving backwards is not, except retried -> pending.
bool phase_transition_legal(RunPhase from, RunPhase to);

struct CellId {
  std::string variant;
  std::string workload;
  int repetition = 1;

  auto operator<=>(const CellId&) const = default;
};

/// One line of the run's append-only event log. `event` is "run_started",
/// "phase", or "cell_final"; cell_final carries the attempt's terminal state:
/// done, faulty, or interrupted (found mid-flight by resume).
struct RunEvent {
  double ts = 0;  // wall clock, unix seconds
  std::string event;
  CellId cell;
  int attempt = 0;
  RunPhase phase = RunPhase::pending;
  std::string state;
  std::string diagnostic;

  bool operator==(const RunEvent&) const = default;
};

/// Single JSON object, no trailing newline.
std::string render_run_event(const RunEvent& e);
RunEvent parse_run_event(const std::string& line);

/// Append-only durable event log backing crash recovery. Every append
/// flushes before returning, so the log is current before the phase it
/// announces has any side effects. A torn final line (crash mid-write) is
/// skipped on replay.
class StateLog {
 public:
  explicit StateLog(const std::string& path);

  void append(const RunEvent& e);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

/// Replays a state log; missing file yields an empty vector, a torn last
/// line is dropped, and a malformed line anywhere else is a DataError.
std::vector<RunEvent> read_state_log(const std::string& path);

/// One attempt's trajectory, folded from the log.
struct AttemptRecord {
  int attempt = 1;
  std::vector<std::pair<RunPhase, double>> phases;  // in log order, with timestamps
  std::string state;  // "done" | "faulty" | "interrupted" | "" while in flight
  std::string diagnostic;

  bool operator==(const AttemptRecord&) const = default;
};

struct CellHistory {
  CellId cell;
  std::vector<AttemptRecord> attempts;

  bool completed() const;
  /// Highest attempt number started; 0 when none.
  int last_attempt() const;
  /// The attempt still without a terminal state, if any.
  const AttemptRecord* in_flight() const;

  bool operator==(const CellHistory&) const = default;
};

/// Groups events per cell in first-appearance order.
std::vector<CellHistory> fold_state_log(const std::vector<RunEvent>& events);

}  // namespace wattbench
