#pragma once

#include <map>
#include <string>

#include "wattbench/report/compare.hpp"

namespace wattbench {

inline constexpr const char* kComparisonCsvHeader =
    "variant,workload,metric,mean,min,max,repetitions,mark,tie";

/// Lossless flat form of the table: one row per (workload, metric, variant)
/// cell, numbers in shortest-round-trip decimal, marks and tie flags inline.
/// Workloads keep table order; variants sort lexicographically within a
/// column so the text is canonical. An empty table is just the header line.
std::string render_comparison_csv(const ComparisonTable& table);

/// Inverse of render_comparison_csv: rendering the parsed table reproduces
/// the input byte for byte. Row orders are reconstructed from first
/// appearance. Throws DataError on schema violations.
ComparisonTable parse_comparison_csv(const std::string& text);

/// One markdown table per workload, variants as rows, best cells bold and
/// worst italic with a dagger on value ties, plus a gaps section when any
/// repetition produced no numbers. Deterministic byte-for-byte.
std::string render_comparison_markdown(const ComparisonTable& table);

/// Monospace rendering of the same content for terminals: aligned columns,
/// best marked '*', worst '!', ties '~'.
std::string render_comparison_text(const ComparisonTable& table);

/// Per-workload SVG charts, keyed by file name: wr-<workload>.svg is a bar
/// chart of mean request consumption with min-max whiskers, and
/// energy-<workload>.svg stacks mean SUT joules under mean overhead joules
/// per variant. Workloads without the needed columns emit no file.
std::map<std::string, std::string> render_comparison_svgs(const ComparisonTable& table);

}  // namespace wattbench
