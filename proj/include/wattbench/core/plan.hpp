#pragma once

#include <string>

#include "wattbench/core/types.hpp"

namespace wattbench {

/// Parse and validate an experiment plan from YAML text. Applies defaults
/// (settle = 60 s, repetitions = 1) and enforces every plan invariant;
/// throws ConfigError with the offending key-path on violation.
ExperimentPlan parse_plan(const std::string& text);

/// Read a plan file; file-path fields (descriptor, scenario, trace endpoints)
/// are resolved relative to the plan file's directory.
ExperimentPlan load_plan(const std::string& path);

/// Render a plan back to YAML. parse_plan(render_plan(p)) == p for any valid
/// plan.
std::string render_plan(const ExperimentPlan& plan);

/// Re-check plan invariants on an already-built plan (used by generators and
/// the CLI validate subcommand). Throws ConfigError.
void validate_plan(const ExperimentPlan& plan);

}  // namespace wattbench
