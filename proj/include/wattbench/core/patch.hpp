#pragma once

#include <string>
#include <vector>

#include "wattbench/core/types.hpp"

namespace wattbench {

/// One parsed step of a patch path: either a map key or a sequence index.
struct PathStep {
  std::string key;
  long index = -1;
  bool is_index = false;
};

/// Splits a dotted patch path like "spec.containers[0].image" into steps.
/// Throws ConfigError on empty segments or malformed index brackets.
std::vector<PathStep> parse_patch_path(const std::string& path);

/// Applies key-path patches to a YAML document and returns the patched text.
/// The input text is never modified; patching works on a deep clone. Map keys
/// that do not exist yet are created, and a sequence index equal to the current
/// length appends. Anything else that does not address an existing node is an
/// error, as is indexing into a map or keying into a sequence.
std::string patch_descriptor(const std::string& yaml_text, const std::vector<PatchOp>& ops);

}  // namespace wattbench
