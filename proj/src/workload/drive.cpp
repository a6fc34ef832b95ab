#include "wattbench/workload/drive.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <queue>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include <httplib.h>

#include "wattbench/core/csv.hpp"
#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"

namespace wattbench {

namespace {

// Deterministic unit-interval draw; avoids the distribution classes whose
// algorithms the standard leaves to the implementation.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t user) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (user + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class StepPicker {
 public:
  explicit StepPicker(const Scenario& scenario) : steps_(scenario.steps) {
    if (steps_.empty()) throw ConfigError("scenario has no steps");
    double total = 0;
    for (const auto& s : steps_) {
      total += s.weight;
      cumulative_.push_back(total);
    }
  }

  const ScenarioStep& pick(std::mt19937_64& rng) const {
    if (steps_.size() == 1) return steps_[0];
    const double u = unit_draw(rng) * cumulative_.back();
    for (size_t i = 0; i < cumulative_.size(); i++) {
      if (u < cumulative_[i]) return steps_[i];
    }
    return steps_.back();
  }

 private:
  const std::vector<ScenarioStep>& steps_;
  std::vector<double> cumulative_;
};

struct Event {
  double time;
  std::int64_t user;
  std::uint64_t seq;

  bool operator>(const Event& o) const {
    return std::tie(time, user, seq) > std::tie(o.time, o.user, o.seq);
  }
};

double now_utc_seconds() {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return std::chrono::duration<double>(now).count();
}

}  // namespace

DriveResult drive_virtual(const UserSchedule& schedule, VirtualTarget& target,
                          const Scenario& scenario, std::uint64_t seed, double base_time) {
  const StepPicker picker(scenario);

  struct VirtualUser {
    std::mt19937_64 rng;
    bool active = true;
  };
  std::vector<VirtualUser> users;
  std::vector<std::int64_t> active_ids;  // spawn order; shrink stops the newest first
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> wakeups;
  std::uint64_t seq = 0;

  DriveResult out;
  out.started = base_time;
  const std::int64_t duration = schedule.duration();
  const bool count_stop = schedule.stop.kind == StopCondition::Kind::request_count;
  double last_time = 0;
  bool stop = false;

  for (std::int64_t t = 0; t < duration && !stop; t++) {
    target.begin_second(t);
    const int wanted = schedule.target_users[static_cast<std::size_t>(t)];
    while (static_cast<int>(active_ids.size()) > wanted) {
      users[static_cast<std::size_t>(active_ids.back())].active = false;
      active_ids.pop_back();
    }
    while (static_cast<int>(active_ids.size()) < wanted) {
      const auto id = static_cast<std::int64_t>(users.size());
      users.push_back(VirtualUser{std::mt19937_64(mix_seed(seed, static_cast<std::uint64_t>(id))),
                                  true});
      active_ids.push_back(id);
      // Stagger first actions across the second so load is not lockstep.
      wakeups.push({static_cast<double>(t) +
                        unit_draw(users[static_cast<std::size_t>(id)].rng),
                    id, seq++});
    }

    while (!wakeups.empty() && wakeups.top().time < static_cast<double>(t) + 1.0) {
      const Event e = wakeups.top();
      wakeups.pop();
      auto& user = users[static_cast<std::size_t>(e.user)];
      if (!user.active) continue;

      const ScenarioStep& step = picker.pick(user.rng);
      const SubmitResult sr = target.submit(e.time, step);

      RequestRecord rec;
      rec.start = base_time + e.time;
      rec.endpoint = step.path;
      rec.status = sr.status;
      rec.latency = sr.latency;
      rec.success = sr.success;
      out.records.push_back(std::move(rec));
      last_time = e.time;

      if (count_stop && static_cast<std::int64_t>(out.records.size()) >= schedule.stop.count) {
        stop = true;
        break;
      }
      // Closed loop: wait for the response, think, go again. The floor keeps
      // a zero-latency zero-think scenario from spinning inside one second.
      const double next = e.time + std::max(sr.latency + step.think_time, 0.001);
      wakeups.push({next, e.user, seq++});
    }
    // Even on an early stop the second is closed out, so a discrete-time
    // target books the requests it already accepted.
    target.end_second(t);
  }

  out.ended = base_time + (stop ? last_time : static_cast<double>(duration));
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const RequestRecord& a, const RequestRecord& b) { return a.start < b.start; });
  return out;
}

DriveResult drive_http(const UserSchedule& schedule, const std::string& base_url,
                       const Scenario& scenario, const HttpDriveConfig& config) {
  const StepPicker picker(scenario);

  std::mutex sink_mutex;
  std::vector<RequestRecord> sink;
  std::atomic<std::int64_t> issued{0};
  std::atomic<bool> done{false};
  std::atomic<double> last_success{now_utc_seconds()};
  std::atomic<bool> any_attempt{false};

  const bool count_stop = schedule.stop.kind == StopCondition::Kind::request_count;
  const std::int64_t want = schedule.stop.count;

  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> active;
  };
  std::vector<Worker> workers;
  std::vector<Worker> retired;  // deactivated but not yet joined

  auto user_loop = [&](std::uint64_t id, std::shared_ptr<std::atomic<bool>> active) {
    std::mt19937_64 rng(mix_seed(config.seed, id));
    httplib::Client client(base_url);
    client.set_connection_timeout(static_cast<time_t>(config.connect_timeout), 0);
    client.set_read_timeout(static_cast<time_t>(config.read_timeout), 0);

    while (active->load() && !done.load()) {
      if (count_stop) {
        const std::int64_t ticket = issued.fetch_add(1);
        if (ticket >= want) break;
      }
      const ScenarioStep& step = picker.pick(rng);
      const double start = now_utc_seconds();
      const auto t0 = std::chrono::steady_clock::now();
      httplib::Result res =
          step.method == "POST" ? client.Post(step.path, "", "text/plain") : client.Get(step.path);
      const auto t1 = std::chrono::steady_clock::now();

      RequestRecord rec;
      rec.start = start;
      rec.endpoint = step.path;
      rec.latency = std::chrono::duration<double>(t1 - t0).count();
      rec.status = res ? res->status : 0;
      rec.success = res && res->status >= 200 && res->status < 300;
      any_attempt.store(true);
      if (rec.success) last_success.store(now_utc_seconds());
      {
        std::lock_guard<std::mutex> lock(sink_mutex);
        sink.push_back(std::move(rec));
        if (count_stop && static_cast<std::int64_t>(sink.size()) >= want) done.store(true);
      }
      if (done.load() || !active->load()) break;

      // Think in slices so schedule changes and stops interrupt promptly.
      double remaining = step.think_time;
      while (remaining > 0 && active->load() && !done.load()) {
        const double slice = std::min(remaining, 0.05);
        std::this_thread::sleep_for(std::chrono::duration<double>(slice));
        remaining -= slice;
      }
    }
  };

  DriveResult out;
  out.started = now_utc_seconds();
  const std::int64_t duration = schedule.duration();

  for (std::int64_t t = 0; t < duration && !done.load(); t++) {
    const auto tick_end = std::chrono::steady_clock::now() + std::chrono::seconds(1);
    const int wanted = schedule.target_users[static_cast<std::size_t>(t)];

    while (static_cast<int>(workers.size()) > wanted) {
      // The worker finishes its in-flight request and exits; joining is
      // deferred to the end so the tick loop never blocks on a slow request.
      workers.back().active->store(false);
      retired.push_back(std::move(workers.back()));
      workers.pop_back();
    }
    while (static_cast<int>(workers.size()) < wanted) {
      auto active = std::make_shared<std::atomic<bool>>(true);
      const auto id = static_cast<std::uint64_t>(workers.size());
      workers.push_back(Worker{std::thread(user_loop, id, active), active});
    }

    while (std::chrono::steady_clock::now() < tick_end && !done.load()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      if (any_attempt.load() &&
          now_utc_seconds() - last_success.load() > config.abort_after) {
        out.aborted = true;
        done.store(true);
      }
    }
  }
  done.store(true);
  for (auto& w : workers) w.active->store(false);
  for (auto& w : workers) {
    if (w.thread.joinable()) w.thread.join();
  }
  for (auto& w : retired) {
    if (w.thread.joinable()) w.thread.join();
  }

  out.ended = now_utc_seconds();
  {
    std::lock_guard<std::mutex> lock(sink_mutex);
    out.records = std::move(sink);
  }
  if (count_stop && static_cast<std::int64_t>(out.records.size()) > want)
    out.records.resize(static_cast<std::size_t>(want));
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const RequestRecord& a, const RequestRecord& b) { return a.start < b.start; });
  return out;
}

std::string render_request_log(const std::vector<RequestRecord>& records) {
  std::string out = kRequestLogHeader;
  out += "\n";
  for (const auto& r : records) {
    out += fmt_shortest(r.start);
    out += ",";
    out += csv_escape(r.endpoint);
    out += ",";
    out += std::to_string(r.status);
    out += ",";
    out += fmt_shortest(r.latency);
    out += ",";
    out += r.success ? "1" : "0";
    out += "\n";
  }
  return out;
}

std::vector<RequestRecord> parse_request_log(const std::string& csv_text) {
  size_t pos = 0;
  std::vector<std::string> fields;
  if (!csv_read_record(csv_text, pos, fields))
    throw DataError("request log is empty (missing header)");
  {
    std::string joined;
    for (size_t i = 0; i < fields.size(); i++) joined += (i ? "," : "") + fields[i];
    if (joined != kRequestLogHeader)
      throw DataError("request log header mismatch: got '" + joined + "'");
  }

  std::vector<RequestRecord> out;
  size_t line = 1;
  while (csv_read_record(csv_text, pos, fields)) {
    line++;
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    if (fields.size() != 5)
      throw DataError("request log line " + std::to_string(line) + ": expected 5 fields, got " +
                      std::to_string(fields.size()));
    try {
      RequestRecord r;
      r.start = parse_double(fields[0]);
      r.endpoint = fields[1];
      r.status = static_cast<int>(parse_int(fields[2]));
      r.latency = parse_double(fields[3]);
      if (fields[4] != "0" && fields[4] != "1") throw DataError("success must be 0 or 1");
      r.success = fields[4] == "1";
      out.push_back(std::move(r));
    } catch (const std::runtime_error& e) {
      throw DataError("request log line " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

void write_request_log(const std::string& path, const std::vector<RequestRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write request log: " + path);
  out << render_request_log(records);
  if (!out.flush()) throw DataError("failed writing request log: " + path);
}

std::vector<RequestRecord> read_request_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read request log: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_request_log(buf.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace wattbench
