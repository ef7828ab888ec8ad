#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "jitai/errors.hpp"
#include "jitai/harness.hpp"

namespace jitai {

// Self-contained SVG charts, one set per (p_w11, p_w00) grid point, with the
// plotted numbers repeated in data-* attributes so they can be checked
// without an SVG renderer.

namespace detail {

constexpr double kPlotWidth = 640.0;
constexpr double kPlotHeight = 400.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

inline std::string_view mode_color(AgentMode mode) {
  return mode == AgentMode::Hybrid ? "#4878cf" : "#9b9b9b";
}

inline std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string svg_open(const std::string& title) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
       "viewBox=\"0 0 640 400\" font-family=\"sans-serif\">\n";
  s += "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"#ffffff\"/>\n";
  s += "  <text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + title + "</text>\n";
  return s;
}

inline std::string axis_lines() {
  std::string s;
  s += "  <line x1=\"" + coord(kMarginLeft) + "\" y1=\"" + coord(kMarginTop) + "\" x2=\"" +
       coord(kMarginLeft) + "\" y2=\"" + coord(kPlotHeight - kMarginBottom) +
       "\" stroke=\"#333333\"/>\n";
  s += "  <line x1=\"" + coord(kMarginLeft) + "\" y1=\"" + coord(kPlotHeight - kMarginBottom) +
       "\" x2=\"" + coord(kPlotWidth - kMarginRight) + "\" y2=\"" +
       coord(kPlotHeight - kMarginBottom) + "\" stroke=\"#333333\"/>\n";
  return s;
}

inline std::string y_axis_labels(double max_value) {
  const double span = kPlotHeight - kMarginTop - kMarginBottom;
  std::string s;
  for (int i = 0; i <= 4; ++i) {
    const double frac = i / 4.0;
    const double y = kPlotHeight - kMarginBottom - frac * span;
    s += "  <text x=\"" + coord(kMarginLeft - 8.0) + "\" y=\"" + coord(y + 4.0) +
         "\" text-anchor=\"end\" font-size=\"11\">" + format_value(max_value * frac) + "</text>\n";
  }
  return s;
}

inline std::string legend(const std::vector<AgentMode>& modes) {
  std::string s;
  double x = kMarginLeft + 10.0;
  for (AgentMode mode : modes) {
    s += "  <rect x=\"" + coord(x) + "\" y=\"" + coord(kMarginTop - 6.0) +
         "\" width=\"12\" height=\"12\" fill=\"" + std::string(mode_color(mode)) + "\"/>\n";
    s += "  <text x=\"" + coord(x + 16.0) + "\" y=\"" + coord(kMarginTop + 4.0) +
         "\" font-size=\"12\">" + std::string(to_string(mode)) + "</text>\n";
    x += 110.0;
  }
  return s;
}

inline std::string point_label(double p_w11, double p_w00) {
  return "p_w11=" + format_prob(p_w11) + ", p_w00=" + format_prob(p_w00);
}

}  // namespace detail

// Bar per mode: median total reward, whisker from q25 to q75.
inline std::string render_totals_svg(const std::vector<CellResult>& cells) {
  using namespace detail;
  if (cells.empty()) throw std::invalid_argument("no cells to plot");
  double max_value = 1.0;
  for (const auto& cell : cells) {
    max_value = std::max({max_value, cell.total_reward.q75, cell.total_reward.median});
  }
  const double span_y = kPlotHeight - kMarginTop - kMarginBottom;
  const double span_x = kPlotWidth - kMarginLeft - kMarginRight;
  const double slot = span_x / static_cast<double>(cells.size());
  const double bar_width = std::min(80.0, slot * 0.5);

  std::vector<AgentMode> modes;
  for (const auto& cell : cells) modes.push_back(cell.mode);
  std::string s = svg_open("Total reward per trial, " + point_label(cells.front().p_w11,
                                                                    cells.front().p_w00));
  s += axis_lines();
  s += y_axis_labels(max_value);
  s += legend(modes);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    const double cx = kMarginLeft + slot * (static_cast<double>(i) + 0.5);
    const double base_y = kPlotHeight - kMarginBottom;
    const double median_y = base_y - cell.total_reward.median / max_value * span_y;
    const double q25_y = base_y - cell.total_reward.q25 / max_value * span_y;
    const double q75_y = base_y - cell.total_reward.q75 / max_value * span_y;
    s += "  <rect x=\"" + coord(cx - bar_width / 2.0) + "\" y=\"" + coord(median_y) +
         "\" width=\"" + coord(bar_width) + "\" height=\"" + coord(base_y - median_y) +
         "\" fill=\"" + std::string(mode_color(cell.mode)) + "\" data-mode=\"" +
         std::string(to_string(cell.mode)) + "\" data-median=\"" +
         format_value(cell.total_reward.median) + "\" data-q25=\"" +
         format_value(cell.total_reward.q25) + "\" data-q75=\"" +
         format_value(cell.total_reward.q75) + "\"/>\n";
    s += "  <line x1=\"" + coord(cx) + "\" y1=\"" + coord(q25_y) + "\" x2=\"" + coord(cx) +
         "\" y2=\"" + coord(q75_y) + "\" stroke=\"#333333\" stroke-width=\"2\"/>\n";
    s += "  <text x=\"" + coord(cx) + "\" y=\"" + coord(base_y + 18.0) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + std::string(to_string(cell.mode)) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

// Grouped bars: executed-action counts pooled over seeds, four actions, one
// bar per mode inside each group.
inline std::string render_actions_svg(const std::vector<CellResult>& cells) {
  using namespace detail;
  if (cells.empty()) throw std::invalid_argument("no cells to plot");
  long max_count = 1;
  for (const auto& cell : cells) {
    for (long count : cell.action_counts) max_count = std::max(max_count, count);
  }
  const double span_y = kPlotHeight - kMarginTop - kMarginBottom;
  const double span_x = kPlotWidth - kMarginLeft - kMarginRight;
  const double group = span_x / static_cast<double>(kNumActions);
  const double bar_width = std::min(40.0, group / (static_cast<double>(cells.size()) + 1.0));

  std::vector<AgentMode> modes;
  for (const auto& cell : cells) modes.push_back(cell.mode);
  std::string s = svg_open("Executed actions, " + point_label(cells.front().p_w11,
                                                              cells.front().p_w00));
  s += axis_lines();
  s += y_axis_labels(static_cast<double>(max_count));
  s += legend(modes);
  for (int a = 0; a < kNumActions; ++a) {
    const double group_left = kMarginLeft + group * static_cast<double>(a);
    const double group_center = group_left + group / 2.0;
    const double total_bars = bar_width * static_cast<double>(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& cell = cells[i];
      const double x = group_center - total_bars / 2.0 + bar_width * static_cast<double>(i);
      const double base_y = kPlotHeight - kMarginBottom;
      const double h = static_cast<double>(cell.action_counts[a]) /
                       static_cast<double>(max_count) * span_y;
      s += "  <rect x=\"" + coord(x) + "\" y=\"" + coord(base_y - h) + "\" width=\"" +
           coord(bar_width) + "\" height=\"" + coord(h) + "\" fill=\"" +
           std::string(mode_color(cell.mode)) + "\" data-mode=\"" +
           std::string(to_string(cell.mode)) + "\" data-action=\"" + std::to_string(a) +
           "\" data-count=\"" + std::to_string(cell.action_counts[a]) + "\"/>\n";
    }
    s += "  <text x=\"" + coord(group_center) + "\" y=\"" +
         coord(kPlotHeight - kMarginBottom + 18.0) +
         "\" text-anchor=\"middle\" font-size=\"12\">a=" + std::to_string(a) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

// Median cumulative reward over time per mode, with a translucent IQR band.
inline std::string render_cumulative_svg(const std::vector<CellResult>& cells) {
  using namespace detail;
  if (cells.empty()) throw std::invalid_argument("no cells to plot");
  double max_value = 1.0;
  std::size_t max_len = 1;
  for (const auto& cell : cells) {
    max_len = std::max(max_len, cell.cumulative_reward.size());
    for (const auto& q : cell.cumulative_reward) {
      max_value = std::max({max_value, q.q75, q.median});
    }
  }
  const double span_y = kPlotHeight - kMarginTop - kMarginBottom;
  const double span_x = kPlotWidth - kMarginLeft - kMarginRight;
  const double dx = max_len > 1 ? span_x / static_cast<double>(max_len - 1) : 0.0;
  auto x_at = [&](std::size_t t) { return kMarginLeft + dx * static_cast<double>(t); };
  auto y_at = [&](double v) {
    return kPlotHeight - kMarginBottom - v / max_value * span_y;
  };

  std::vector<AgentMode> modes;
  for (const auto& cell : cells) modes.push_back(cell.mode);
  std::string s = svg_open("Cumulative reward, " + point_label(cells.front().p_w11,
                                                               cells.front().p_w00));
  s += axis_lines();
  s += y_axis_labels(max_value);
  s += legend(modes);
  for (const auto& cell : cells) {
    if (cell.cumulative_reward.empty()) continue;
    std::string band = "  <polygon points=\"";
    for (std::size_t t = 0; t < cell.cumulative_reward.size(); ++t) {
      band += coord(x_at(t)) + "," + coord(y_at(cell.cumulative_reward[t].q75)) + " ";
    }
    for (std::size_t t = cell.cumulative_reward.size(); t-- > 0;) {
      band += coord(x_at(t)) + "," + coord(y_at(cell.cumulative_reward[t].q25));
      if (t > 0) band += " ";
    }
    band += "\" fill=\"" + std::string(mode_color(cell.mode)) + "\" fill-opacity=\"0.2\"/>\n";
    s += band;

    std::string line = "  <polyline points=\"";
    for (std::size_t t = 0; t < cell.cumulative_reward.size(); ++t) {
      if (t > 0) line += " ";
      line += coord(x_at(t)) + "," + coord(y_at(cell.cumulative_reward[t].median));
    }
    line += "\" fill=\"none\" stroke=\"" + std::string(mode_color(cell.mode)) +
            "\" stroke-width=\"2\" data-mode=\"" + std::string(to_string(cell.mode)) +
            "\" data-final-median=\"" +
            format_value(cell.cumulative_reward.back().median) + "\"/>\n";
    s += line;
  }
  s += "  <text x=\"" + coord((kMarginLeft + kPlotWidth - kMarginRight) / 2.0) + "\" y=\"" +
       coord(kPlotHeight - kMarginBottom + 30.0) +
       "\" text-anchor=\"middle\" font-size=\"12\">t</text>\n";
  s += "</svg>\n";
  return s;
}

// Writes plot_{totals,actions,cumulative}_pw11_<v>_pw00_<v>.svg per grid
// point, overlaying every mode present in that cell group. No cells, no files.
inline void emit_plots(const AggregateResult& result, const std::filesystem::path& dir) {
  if (result.cells.empty()) return;
  detail::ensure_writable_dir(dir);
  struct Group {
    double p_w11;
    double p_w00;
    std::vector<CellResult> cells;
  };
  std::vector<Group> groups;
  for (const auto& cell : result.cells) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.p_w11 == cell.p_w11 && g.p_w00 == cell.p_w00;
    });
    if (it == groups.end()) {
      groups.push_back({cell.p_w11, cell.p_w00, {cell}});
    } else {
      it->cells.push_back(cell);
    }
  }
  auto write_file = [&dir](const std::string& name, const std::string& body) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
  };
  for (const auto& g : groups) {
    const std::string suffix =
        "pw11_" + detail::format_prob(g.p_w11) + "_pw00_" + detail::format_prob(g.p_w00) + ".svg";
    write_file("plot_totals_" + suffix, render_totals_svg(g.cells));
    write_file("plot_actions_" + suffix, render_actions_svg(g.cells));
    write_file("plot_cumulative_" + suffix, render_cumulative_svg(g.cells));
  }
}

}  // namespace jitai
