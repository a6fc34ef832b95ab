#include <sys/wait.h>

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "wattbench/run/driver.hpp"

namespace wattbench {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

std::string substitute(const std::string& templ, const std::map<std::string, std::string>& subs) {
  std::string out;
  size_t pos = 0;
  while (pos < templ.size()) {
    const size_t open = templ.find('{', pos);
    if (open == std::string::npos) {
      out += templ.substr(pos);
      break;
    }
    const size_t close = templ.find('}', open);
    if (close == std::string::npos) {
      out += templ.substr(pos);
      break;
    }
    out += templ.substr(pos, open - pos);
    const std::string key = templ.substr(open + 1, close - open - 1);
    auto it = subs.find(key);
    if (it != subs.end())
      out += shell_quote(it->second);
    else
      out += templ.substr(open, close - open + 1);  // unknown placeholder stays literal
    pos = close + 1;
  }
  return out;
}

std::string last_nonempty_line(const std::string& text) {
  size_t end = text.size();
  while (end > 0) {
    size_t start = text.find_last_of('\n', end - 1);
    const size_t line_start = start == std::string::npos ? 0 : start + 1;
    std::string line = text.substr(line_start, end - line_start);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) return line;
    if (line_start == 0) break;
    end = line_start - 1;
  }
  return "";
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

ExternalDriverConfig parse_driver_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("driver config: invalid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("driver config: top level must be a map");
  ExternalDriverConfig c;
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (key == "build")
      c.build_cmd = kv.second.as<std::string>();
    else if (key == "deploy")
      c.deploy_cmd = kv.second.as<std::string>();
    else if (key == "ready")
      c.ready_cmd = kv.second.as<std::string>();
    else if (key == "topology")
      c.topology_cmd = kv.second.as<std::string>();
    else if (key == "endpoint")
      c.endpoint_cmd = kv.second.as<std::string>();
    else if (key == "teardown")
      c.teardown_cmd = kv.second.as<std::string>();
    else if (key == "scratch_dir")
      c.scratch_dir = kv.second.as<std::string>();
    else if (key == "ready_poll_s")
      c.ready_poll_s = kv.second.as<double>();
    else
      throw ConfigError("driver config: unknown key '" + key + "'");
  }
  if (c.ready_poll_s <= 0) throw ConfigError("driver config: ready_poll_s must be positive");
  return c;
}

ExternalDriverConfig load_driver_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read driver config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_driver_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ExternalCommandDriver::ExternalCommandDriver(ExternalDriverConfig config)
    : config_(std::move(config)) {
  if (config_.scratch_dir.empty())
    config_.scratch_dir = std::filesystem::temp_directory_path().string();
}

ExternalCommandDriver::Command ExternalCommandDriver::run(
    const std::string& templ, const std::map<std::string, std::string>& subs) {
  Command result;
  const std::string cmd = substitute(templ, subs);
  // stderr folds into the captured stream so the transcript is complete.
  FILE* pipe = popen(("( " + cmd + " ) 2>&1").c_str(), "r");
  if (!pipe) throw DriverError("cannot spawn '" + cmd + "'");
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  transcript_ += "$ " + cmd + "\n" + result.output;
  if (!result.output.empty() && result.output.back() != '\n') transcript_ += "\n";
  transcript_ += "[exit " + std::to_string(result.exit_code) + "]\n";
  return result;
}

BuildArtifact ExternalCommandDriver::build(const VariantSpec& variant) {
  BuildArtifact a;
  if (config_.build_cmd.empty()) {
    a.ref = "unbuilt";
    a.log = "no build command configured\n";
    return a;
  }
  const auto r = run(config_.build_cmd, {{"source", variant.source}, {"variant", variant.name}});
  if (r.exit_code != 0)
    throw DriverError("build command failed (exit " + std::to_string(r.exit_code) + ")", r.output);
  a.ref = last_nonempty_line(r.output);
  if (a.ref.empty()) a.ref = "build-ok";
  a.log = r.output;
  return a;
}

DeployHandle ExternalCommandDriver::deploy(const std::string& descriptor_text) {
  if (config_.deploy_cmd.empty()) throw DriverError("no deploy command configured");
  const std::string path =
      (std::filesystem::path(config_.scratch_dir) /
       ("wattbench-descriptor-" + std::to_string(next_id_) + ".yaml"))
          .string();
  {
    std::ofstream out(path);
    if (!out) throw DriverError("cannot write descriptor to '" + path + "'");
    out << descriptor_text;
  }
  const auto r = run(config_.deploy_cmd, {{"descriptor", path}});
  if (r.exit_code != 0)
    throw DriverError("deploy command failed (exit " + std::to_string(r.exit_code) + ")",
                      r.output);
  DeployHandle h{last_nonempty_line(r.output)};
  if (h.id.empty()) h.id = "deploy-" + std::to_string(next_id_);
  next_id_++;
  torn_[h.id] = false;
  return h;
}

void ExternalCommandDriver::wait_ready(const DeployHandle& handle, double timeout_s) {
  if (config_.ready_cmd.empty()) return;
  const auto start = std::chrono::steady_clock::now();
  std::string last_output;
  while (true) {
    const auto r = run(config_.ready_cmd, {{"handle", handle.id}});
    if (r.exit_code == 0) return;
    last_output = r.output;
    const double elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start).count();
    if (elapsed + config_.ready_poll_s > timeout_s)
      throw DriverError("deployment '" + handle.id + "' not ready after " +
                            std::to_string(timeout_s) + " s",
                        last_output);
    std::this_thread::sleep_for(std::chrono::duration<double>(config_.ready_poll_s));
  }
}

TopologyMap ExternalCommandDriver::topology(const DeployHandle& handle) {
  if (config_.topology_cmd.empty()) return {};
  const auto r = run(config_.topology_cmd, {{"handle", handle.id}});
  if (r.exit_code != 0)
    throw DriverError("topology command failed (exit " + std::to_string(r.exit_code) + ")",
                      r.output);
  TopologyMap map;
  std::istringstream in(r.output);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 4)
      throw DriverError("topology output line " + std::to_string(line_no) +
                            ": expected 'pod node service layer'",
                        r.output);
    try {
      map[tokens[0]] = PodInfo{tokens[1], tokens[2], layer_from_name(tokens[3])};
    } catch (const std::exception& e) {
      throw DriverError("topology output line " + std::to_string(line_no) + ": " + e.what(),
                        r.output);
    }
  }
  return map;
}

void ExternalCommandDriver::teardown(const DeployHandle& handle) {
  auto it = torn_.find(handle.id);
  if (it == torn_.end() || it->second) return;  // unknown or already gone
  it->second = true;
  if (config_.teardown_cmd.empty()) return;
  const auto r = run(config_.teardown_cmd, {{"handle", handle.id}});
  if (r.exit_code != 0)
    throw DriverError("teardown command failed (exit " + std::to_string(r.exit_code) + ")",
                      r.output);
}

std::string ExternalCommandDriver::take_transcript() {
  std::string out;
  out.swap(transcript_);
  return out;
}

std::string ExternalCommandDriver::endpoint(const DeployHandle& handle) {
  if (config_.endpoint_cmd.empty())
    throw DriverError("no endpoint command configured; cannot locate the workload target");
  const auto r = run(config_.endpoint_cmd, {{"handle", handle.id}});
  if (r.exit_code != 0)
    throw DriverError("endpoint command failed (exit " + std::to_string(r.exit_code) + ")",
                      r.output);
  const std::string url = last_nonempty_line(r.output);
  if (url.empty()) throw DriverError("endpoint command printed no URL", r.output);
  return url;
}

}  // namespace wattbench
