#include "wattbench/report/render.hpp"

#include <algorithm>
#include <vector>

#include "wattbench/core/csv.hpp"
#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"

namespace wattbench {

namespace {

// U+2212 minus, the range separator used in report tables.
constexpr const char* kRangeSep = " \xe2\x88\x92 ";

std::vector<std::string> all_metrics() {
  std::vector<std::string> out = comparison_metrics();
  const auto& comp = component_metrics();
  out.insert(out.end(), comp.begin(), comp.end());
  return out;
}

std::string fmt_metric(const std::string& metric, double v) {
  // Money per kilorequest is fixed to two decimals; everything else renders
  // with six significant digits.
  return metric == "cost_per_kilorequest" ? fmt_fixed(v, 2) : fmt_sig(v, 6);
}

const StatCell* find_cell(const ComparisonTable& t, const std::string& w, const std::string& m,
                          const std::string& v) {
  auto wi = t.cells.find(w);
  if (wi == t.cells.end()) return nullptr;
  auto mi = wi->second.find(m);
  if (mi == wi->second.end()) return nullptr;
  auto vi = mi->second.find(v);
  return vi == mi->second.end() ? nullptr : &vi->second;
}

enum class Mark { none, best, worst };

Mark mark_of(const ComparisonTable& t, const std::string& w, const std::string& m,
             const std::string& v, bool& tied) {
  tied = false;
  auto lookup = [&](const std::map<std::string, std::map<std::string, std::string>>& marks,
                    const std::map<std::string, std::map<std::string, bool>>& tie_flags) {
    auto wi = marks.find(w);
    if (wi == marks.end()) return false;
    auto mi = wi->second.find(m);
    if (mi == wi->second.end() || mi->second != v) return false;
    tied = tie_flags.at(w).at(m);
    return true;
  };
  if (lookup(t.best, t.best_tied)) return Mark::best;
  if (lookup(t.worst, t.worst_tied)) return Mark::worst;
  return Mark::none;
}

std::string cell_body(const std::string& metric, const StatCell& s) {
  std::string out = fmt_metric(metric, s.mean);
  if (s.repetitions > 1) {
    out += " (";
    out += fmt_metric(metric, s.min);
    out += kRangeSep;
    out += fmt_metric(metric, s.max);
    out += ")";
  }
  return out;
}

std::string column_header(const std::string& metric) {
  const std::string unit = metric_unit(metric);
  return unit.empty() ? metric : metric + " (" + unit + ")";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string clip_label(const std::string& s) {
  return s.size() <= 16 ? s : s.substr(0, 14) + "..";
}

}  // namespace

std::string render_comparison_csv(const ComparisonTable& table) {
  std::string out = kComparisonCsvHeader;
  out += "\n";
  for (const auto& workload : table.workloads) {
    auto wi = table.cells.find(workload);
    if (wi == table.cells.end()) continue;
    for (const auto& metric : all_metrics()) {
      auto mi = wi->second.find(metric);
      if (mi == wi->second.end()) continue;
      for (const auto& [variant, s] : mi->second) {
        bool tied = false;
        const Mark mark = mark_of(table, workload, metric, variant, tied);
        out += csv_escape(variant);
        out += ',';
        out += csv_escape(workload);
        out += ',';
        out += metric;
        out += ',';
        out += fmt_shortest(s.mean);
        out += ',';
        out += fmt_shortest(s.min);
        out += ',';
        out += fmt_shortest(s.max);
        out += ',';
        out += std::to_string(s.repetitions);
        out += ',';
        out += mark == Mark::best ? "best" : mark == Mark::worst ? "worst" : "";
        out += ',';
        out += tied ? "1" : "";
        out += '\n';
      }
    }
  }
  return out;
}

ComparisonTable parse_comparison_csv(const std::string& text) {
  ComparisonTable table;
  size_t pos = 0;
  std::vector<std::string> fields;
  if (!csv_read_record(text, pos, fields))
    throw DataError("comparison csv: empty input");
  {
    std::string header;
    for (size_t i = 0; i < fields.size(); i++) {
      if (i) header += ',';
      header += fields[i];
    }
    if (header != kComparisonCsvHeader)
      throw DataError("comparison csv: unexpected header '" + header + "'");
  }
  const auto known = all_metrics();
  auto note = [](std::vector<std::string>& order, const std::string& name) {
    if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
  };
  int line = 1;
  while (csv_read_record(text, pos, fields)) {
    line++;
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
    if (fields.size() != 9)
      throw DataError("comparison csv line " + std::to_string(line) + ": expected 9 fields, got " +
                      std::to_string(fields.size()));
    const std::string& variant = fields[0];
    const std::string& workload = fields[1];
    const std::string& metric = fields[2];
    if (std::find(known.begin(), known.end(), metric) == known.end())
      throw DataError("comparison csv line " + std::to_string(line) + ": unknown metric '" +
                      metric + "'");
    StatCell s;
    s.mean = parse_double(fields[3]);
    s.min = parse_double(fields[4]);
    s.max = parse_double(fields[5]);
    s.repetitions = static_cast<int>(parse_int(fields[6]));
    auto& column = table.cells[workload][metric];
    if (column.count(variant))
      throw DataError("comparison csv line " + std::to_string(line) + ": duplicate cell " +
                      variant + "/" + workload + "/" + metric);
    column[variant] = s;
    note(table.variants, variant);
    note(table.workloads, workload);
    const std::string& mark = fields[7];
    const bool tied = fields[8] == "1";
    if (!fields[8].empty() && fields[8] != "1")
      throw DataError("comparison csv line " + std::to_string(line) + ": bad tie flag '" +
                      fields[8] + "'");
    if (mark == "best") {
      if (table.best[workload].count(metric))
        throw DataError("comparison csv line " + std::to_string(line) + ": second best mark in " +
                        workload + "/" + metric);
      table.best[workload][metric] = variant;
      table.best_tied[workload][metric] = tied;
    } else if (mark == "worst") {
      if (table.worst[workload].count(metric))
        throw DataError("comparison csv line " + std::to_string(line) + ": second worst mark in " +
                        workload + "/" + metric);
      table.worst[workload][metric] = variant;
      table.worst_tied[workload][metric] = tied;
    } else if (!mark.empty()) {
      throw DataError("comparison csv line " + std::to_string(line) + ": bad mark '" + mark + "'");
    } else if (tied) {
      throw DataError("comparison csv line " + std::to_string(line) + ": tie flag without mark");
    }
  }
  return table;
}

std::string render_comparison_markdown(const ComparisonTable& table) {
  std::string out = "# Comparison\n\n";
  if (table.variants.empty()) {
    out += "(no completed cells)\n";
  } else {
    out +=
        "Cells are mean (min" + std::string(kRangeSep) +
        "max) over completed repetitions. Bold marks the best variant in a\n"
        "column, italic the worst; \xe2\x80\xa0 flags a value tie broken by variant name.\n";
    for (const auto& workload : table.workloads) {
      out += "\n## Workload: " + workload + "\n\n";
      out += "| variant |";
      for (const auto& metric : comparison_metrics()) out += " " + column_header(metric) + " |";
      out += "\n|---|";
      for (size_t i = 0; i < comparison_metrics().size(); i++) out += "---:|";
      out += "\n";
      for (const auto& variant : table.variants) {
        out += "| " + variant + " |";
        for (const auto& metric : comparison_metrics()) {
          const StatCell* cell = find_cell(table, workload, metric, variant);
          if (!cell) {
            out += " - |";
            continue;
          }
          bool tied = false;
          const Mark mark = mark_of(table, workload, metric, variant, tied);
          std::string body = cell_body(metric, *cell);
          if (mark == Mark::best)
            body = "**" + body + "**";
          else if (mark == Mark::worst)
            body = "*" + body + "*";
          if (tied) body += "\xe2\x80\xa0";
          out += " " + body + " |";
        }
        out += "\n";
      }
    }
  }
  if (!table.gaps.empty()) {
    out += "\n## Gaps\n\n";
    for (const auto& gap : table.gaps) out += "- " + gap + "\n";
  }
  return out;
}

std::string render_comparison_text(const ComparisonTable& table) {
  std::string out;
  if (table.variants.empty()) return "(no completed cells)\n";
  for (const auto& workload : table.workloads) {
    out += "workload: " + workload + "\n";
    // Column 0 holds variant names; the rest one ranked metric each.
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> head = {"variant"};
    for (const auto& metric : comparison_metrics()) head.push_back(column_header(metric));
    rows.push_back(head);
    for (const auto& variant : table.variants) {
      std::vector<std::string> row = {variant};
      for (const auto& metric : comparison_metrics()) {
        const StatCell* cell = find_cell(table, workload, metric, variant);
        if (!cell) {
          row.push_back("-");
          continue;
        }
        bool tied = false;
        const Mark mark = mark_of(table, workload, metric, variant, tied);
        std::string body = cell_body(metric, *cell);
        if (mark == Mark::best) body += " *";
        if (mark == Mark::worst) body += " !";
        if (tied) body += "~";
        row.push_back(body);
      }
      rows.push_back(row);
    }
    std::vector<size_t> width(rows[0].size(), 0);
    for (const auto& row : rows)
      for (size_t i = 0; i < row.size(); i++) width[i] = std::max(width[i], row[i].size());
    for (const auto& row : rows) {
      std::string line;
      for (size_t i = 0; i < row.size(); i++) {
        line += row[i];
        if (i + 1 < row.size()) line += std::string(width[i] - row[i].size() + 2, ' ');
      }
      out += "  " + line + "\n";
    }
  }
  out += "legend: * best  ! worst  ~ tie; cells are mean (min" + std::string(kRangeSep) +
         "max)\n";
  if (!table.gaps.empty()) {
    out += "gaps:\n";
    for (const auto& gap : table.gaps) out += "  - " + gap + "\n";
  }
  return out;
}

namespace {

struct BarDatum {
  std::string label;
  double bottom = 0;  // single-series charts use only this
  double top = 0;
  double lo = 0;
  double hi = 0;
};

// Shared scaffold for both chart kinds: white canvas, y axis with five ticks,
// labelled bars. Stacked mode draws bottom+top rectangles and a legend,
// plain mode one rectangle with a min-max whisker.
std::string bar_chart(const std::string& title, const std::vector<BarDatum>& data, bool stacked,
                      const char* legend_bottom, const char* legend_top) {
  const double w = 640, h = 360, left = 72, right = 16, top_m = 40, bottom_m = 52;
  const double plot_w = w - left - right;
  const double plot_h = h - top_m - bottom_m;
  const double y0 = top_m + plot_h;

  double vmax = 0;
  for (const auto& d : data) vmax = std::max(vmax, stacked ? d.bottom + d.top : std::max(d.hi, d.bottom));
  if (vmax <= 0) vmax = 1;
  const double vub = vmax * 1.05;
  const double scale = plot_h / vub;

  auto px = [](double v) { return fmt_fixed(v, 2); };
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" "
         "viewBox=\"0 0 640 360\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"640\" height=\"360\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + xml_escape(title) +
         "</text>\n";
  for (int i = 0; i <= 4; i++) {
    const double v = vub * i / 4;
    const double y = y0 - v * scale;
    svg += "<line x1=\"" + px(left) + "\" y1=\"" + px(y) + "\" x2=\"" + px(w - right) + "\" y2=\"" +
           px(y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + px(left - 6) + "\" y=\"" + px(y + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + fmt_sig(v, 4) + "</text>\n";
  }
  svg += "<line x1=\"" + px(left) + "\" y1=\"" + px(top_m) + "\" x2=\"" + px(left) + "\" y2=\"" +
         px(y0) + "\" stroke=\"#444444\"/>\n";
  svg += "<line x1=\"" + px(left) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(w - right) + "\" y2=\"" +
         px(y0) + "\" stroke=\"#444444\"/>\n";

  const double slot = plot_w / static_cast<double>(data.size());
  const double bw = slot * 0.6;
  for (size_t i = 0; i < data.size(); i++) {
    const auto& d = data[i];
    const double x = left + slot * static_cast<double>(i) + slot * 0.2;
    const double cx = x + bw / 2;
    const double h_bottom = d.bottom * scale;
    svg += "<rect x=\"" + px(x) + "\" y=\"" + px(y0 - h_bottom) + "\" width=\"" + px(bw) +
           "\" height=\"" + px(h_bottom) + "\" fill=\"#4a90d9\"/>\n";
    if (stacked) {
      const double h_top = d.top * scale;
      svg += "<rect x=\"" + px(x) + "\" y=\"" + px(y0 - h_bottom - h_top) + "\" width=\"" + px(bw) +
             "\" height=\"" + px(h_top) + "\" fill=\"#e2a03f\"/>\n";
      svg += "<text x=\"" + px(cx) + "\" y=\"" + px(y0 - h_bottom - h_top - 5) +
             "\" text-anchor=\"middle\" font-size=\"11\">" + fmt_sig(d.bottom + d.top, 4) +
             "</text>\n";
    } else {
      if (d.hi > d.lo) {
        svg += "<line x1=\"" + px(cx) + "\" y1=\"" + px(y0 - d.lo * scale) + "\" x2=\"" + px(cx) +
               "\" y2=\"" + px(y0 - d.hi * scale) + "\" stroke=\"#333333\"/>\n";
        for (double v : {d.lo, d.hi}) {
          svg += "<line x1=\"" + px(cx - 5) + "\" y1=\"" + px(y0 - v * scale) + "\" x2=\"" +
                 px(cx + 5) + "\" y2=\"" + px(y0 - v * scale) + "\" stroke=\"#333333\"/>\n";
        }
      }
      svg += "<text x=\"" + px(cx) + "\" y=\"" + px(y0 - std::max(d.hi, d.bottom) * scale - 5) +
             "\" text-anchor=\"middle\" font-size=\"11\">" + fmt_sig(d.bottom, 4) + "</text>\n";
    }
    svg += "<text x=\"" + px(cx) + "\" y=\"" + px(y0 + 16) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + xml_escape(clip_label(d.label)) +
           "</text>\n";
  }
  if (stacked) {
    svg += "<rect x=\"500\" y=\"34\" width=\"12\" height=\"12\" fill=\"#4a90d9\"/>\n";
    svg += "<text x=\"516\" y=\"44\" font-size=\"11\">" + std::string(legend_bottom) + "</text>\n";
    svg += "<rect x=\"560\" y=\"34\" width=\"12\" height=\"12\" fill=\"#e2a03f\"/>\n";
    svg += "<text x=\"576\" y=\"44\" font-size=\"11\">" + std::string(legend_top) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

std::map<std::string, std::string> render_comparison_svgs(const ComparisonTable& table) {
  std::map<std::string, std::string> files;
  auto unique_name = [&files](const std::string& stem) {
    std::string name = stem + ".svg";
    for (int i = 2; files.count(name); i++) name = stem + "-" + std::to_string(i) + ".svg";
    return name;
  };
  for (const auto& workload : table.workloads) {
    std::vector<BarDatum> wr, energy;
    for (const auto& variant : table.variants) {
      if (const StatCell* c = find_cell(table, workload, "wr", variant))
        wr.push_back({variant, c->mean, 0, c->min, c->max});
      const StatCell* sut = find_cell(table, workload, "sut_joules", variant);
      const StatCell* overhead = find_cell(table, workload, "overhead_joules", variant);
      if (sut && overhead) energy.push_back({variant, sut->mean, overhead->mean, 0, 0});
    }
    if (!wr.empty()) {
      files[unique_name("wr-" + path_slug(workload))] = bar_chart(
          "Request consumption (J/req), workload " + workload, wr, false, nullptr, nullptr);
    }
    if (!energy.empty()) {
      files[unique_name("energy-" + path_slug(workload))] =
          bar_chart("Energy split (J), workload " + workload, energy, true, "sut", "overhead");
    }
  }
  return files;
}

}  // namespace wattbench
