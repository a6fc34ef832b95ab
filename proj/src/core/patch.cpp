#include "wattbench/core/patch.hpp"

#include <yaml-cpp/yaml.h>

#include <sstream>

#include "wattbench/core/error.hpp"

namespace wattbench {

std::vector<PathStep> parse_patch_path(const std::string& path) {
  if (path.empty()) throw ConfigError("patch path is empty");
  std::vector<PathStep> steps;
  size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '[') {
      const auto close = path.find(']', i);
      if (close == std::string::npos)
        throw ConfigError("patch path '" + path + "': unterminated index");
      const auto digits = path.substr(i + 1, close - i - 1);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("patch path '" + path + "': bad index '" + digits + "'");
      steps.push_back({"", std::stol(digits), true});
      i = close + 1;
      if (i < path.size() && path[i] == '.') i++;
    } else {
      auto end = path.find_first_of(".[", i);
      if (end == std::string::npos) end = path.size();
      if (end == i) throw ConfigError("patch path '" + path + "': empty segment");
      steps.push_back({path.substr(i, end - i), -1, false});
      i = end;
      if (i < path.size() && path[i] == '.') i++;
    }
  }
  if (steps.empty()) throw ConfigError("patch path '" + path + "': no segments");
  return steps;
}

namespace {

void apply_one(YAML::Node root, const PatchOp& op) {
  const auto steps = parse_patch_path(op.path);
  YAML::Node cur = root;
  for (size_t s = 0; s + 1 < steps.size(); s++) {
    const auto& st = steps[s];
    if (st.is_index) {
      if (!cur.IsSequence())
        throw ConfigError("patch path '" + op.path + "': index into a non-sequence");
      if (st.index >= static_cast<long>(cur.size()))
        throw ConfigError("patch path '" + op.path + "': index " + std::to_string(st.index) +
                          " out of range (size " + std::to_string(cur.size()) + ")");
      cur.reset(cur[st.index]);
    } else {
      if (cur.IsSequence())
        throw ConfigError("patch path '" + op.path + "': key '" + st.key + "' into a sequence");
      if (!cur[st.key]) cur[st.key] = YAML::Node(YAML::NodeType::Map);
      cur.reset(cur[st.key]);
    }
  }

  const auto& last = steps.back();
  if (last.is_index) {
    if (!cur.IsSequence())
      throw ConfigError("patch path '" + op.path + "': index into a non-sequence");
    if (last.index > static_cast<long>(cur.size()))
      throw ConfigError("patch path '" + op.path + "': index " + std::to_string(last.index) +
                        " out of range (size " + std::to_string(cur.size()) + ")");
    if (last.index == static_cast<long>(cur.size()))
      cur.push_back(op.value);
    else
      cur[last.index] = op.value;
  } else {
    if (cur.IsSequence())
      throw ConfigError("patch path '" + op.path + "': key '" + last.key + "' into a sequence");
    cur[last.key] = op.value;
  }
}

}  // namespace

std::string patch_descriptor(const std::string& yaml_text, const std::vector<PatchOp>& ops) {
  YAML::Node doc;
  try {
    doc = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("descriptor is not well-formed YAML: ") + e.what());
  }
  YAML::Node patched = YAML::Clone(doc);
  if (!patched.IsMap() && !patched.IsSequence() && !ops.empty())
    throw ConfigError("descriptor root must be a mapping or sequence to patch");
  for (const auto& op : ops) apply_one(patched, op);
  std::ostringstream os;
  os << patched << "\n";
  return os.str();
}

}  // namespace wattbench
