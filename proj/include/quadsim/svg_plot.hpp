#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "quadsim/errors.hpp"
#include "quadsim/simulation.hpp"

namespace quadsim {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

namespace detail {

inline const char* kPalette[8] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

inline std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// Largest "round" step (1/2/5 x 10^k) not exceeding range/target.
inline double nice_step(double range, int target) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {5.0, 2.0, 1.0})
    if (mag * mult <= raw) return mag * mult;
  return mag;
}

}  // namespace detail

/// Writes a static line chart. Output bytes depend only on the inputs, so
/// regenerating from the same data reproduces the file exactly. Long series
/// are thinned to at most 2000 points with a fixed stride.
inline void write_line_plot(const std::string& path, const std::string& title,
                            const std::string& x_label,
                            const std::string& y_label,
                            const std::vector<PlotSeries>& series) {
  const int width = 900, height = 520;
  const int ml = 72, mr = 170, mt = 44, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!any) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        any = true;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  if (xmax - xmin < 1e-12) { xmax += 1.0; xmin -= 1.0; }
  if (ymax - ymin < 1e-12) { ymax += 1.0; ymin -= 1.0; }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(width / 2) +
         "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" "
         "text-anchor=\"middle\">" + title + "</text>\n";

  const double xstep = detail::nice_step(xmax - xmin, 8);
  const double ystep = detail::nice_step(ymax - ymin, 6);
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep;
       x += xstep) {
    svg += "<line x1=\"" + detail::fmt("%.2f", px(x)) + "\" y1=\"" +
           std::to_string(mt) + "\" x2=\"" + detail::fmt("%.2f", px(x)) +
           "\" y2=\"" + std::to_string(mt + (int)ph) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::fmt("%.2f", px(x)) + "\" y=\"" +
           std::to_string(mt + (int)ph + 18) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">" + detail::fmt("%g", x) + "</text>\n";
  }
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9 * ystep;
       y += ystep) {
    svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" +
           detail::fmt("%.2f", py(y)) + "\" x2=\"" + std::to_string(ml + (int)pw) +
           "\" y2=\"" + detail::fmt("%.2f", py(y)) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + std::to_string(ml - 6) + "\" y=\"" +
           detail::fmt("%.2f", py(y) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"end\">" + detail::fmt("%g", y) + "</text>\n";
  }
  svg += "<rect x=\"" + std::to_string(ml) + "\" y=\"" + std::to_string(mt) +
         "\" width=\"" + std::to_string((int)pw) + "\" height=\"" +
         std::to_string((int)ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + std::to_string(ml + (int)pw / 2) + "\" y=\"" +
         std::to_string(height - 12) +
         "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">" + x_label + "</text>\n";
  svg += "<text x=\"18\" y=\"" + std::to_string(mt + (int)ph / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 " + std::to_string(mt + (int)ph / 2) +
         ")\">" + y_label + "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const size_t n = std::min(s.x.size(), s.y.size());
    if (n == 0) continue;
    const size_t stride = std::max<size_t>(1, (n + 1999) / 2000);
    std::string pts;
    for (size_t i = 0; i < n; i += stride) {
      pts += detail::fmt("%.2f", px(s.x[i]));
      pts += ',';
      pts += detail::fmt("%.2f", py(s.y[i]));
      pts += ' ';
    }
    if ((n - 1) % stride != 0) {
      pts += detail::fmt("%.2f", px(s.x[n - 1]));
      pts += ',';
      pts += detail::fmt("%.2f", py(s.y[n - 1]));
    }
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += detail::kPalette[si % 8];
    svg += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";

    const int ly = mt + 16 + static_cast<int>(si) * 18;
    svg += "<line x1=\"" + std::to_string(width - mr + 10) + "\" y1=\"" +
           std::to_string(ly - 4) + "\" x2=\"" + std::to_string(width - mr + 34) +
           "\" y2=\"" + std::to_string(ly - 4) + "\" stroke=\"";
    svg += detail::kPalette[si % 8];
    svg += "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + std::to_string(width - mr + 40) + "\" y=\"" +
           std::to_string(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label +
           "</text>\n";
  }
  svg += "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write plot file: " + path);
  out << svg;
  if (!out) throw IoError("failed while writing plot file: " + path);
}

/// The standard chart set for one or two traces (overlay): positions,
/// Euler angles, control inputs, and per-subsystem Lyapunov values when the
/// traces carry them. Returns the written file paths.
inline std::vector<std::string> write_standard_plots(
    const std::vector<const SimTrace*>& traces, const std::string& out_dir) {
  std::vector<std::string> written;
  auto collect = [&](auto&& value_of, const char* component,
                     const SimTrace& tr) {
    PlotSeries s;
    s.label = tr.meta.controller + std::string(" ") + component;
    s.x.reserve(tr.rows.size());
    s.y.reserve(tr.rows.size());
    for (const TraceRow& r : tr.rows) {
      s.x.push_back(r.t);
      s.y.push_back(value_of(r));
    }
    return s;
  };

  {
    std::vector<PlotSeries> series;
    for (const SimTrace* tr : traces) {
      series.push_back(collect([](const TraceRow& r) { return r.state.x(); }, "x", *tr));
      series.push_back(collect([](const TraceRow& r) { return r.state.y(); }, "y", *tr));
      series.push_back(collect([](const TraceRow& r) { return r.state.z(); }, "z", *tr));
    }
    if (!traces.empty() && !traces[0]->rows.empty()) {
      series.push_back(collect(
          [](const TraceRow& r) { return r.reference.x.value; }, "x ref", *traces[0]));
      series.push_back(collect(
          [](const TraceRow& r) { return r.reference.y.value; }, "y ref", *traces[0]));
      series.push_back(collect(
          [](const TraceRow& r) { return r.reference[Channel::kZ].value; }, "z ref",
          *traces[0]));
    }
    const std::string path = out_dir + "/positions.svg";
    write_line_plot(path, "Position vs time", "t [s]", "position [m]", series);
    written.push_back(path);
  }
  {
    std::vector<PlotSeries> series;
    for (const SimTrace* tr : traces) {
      series.push_back(collect([](const TraceRow& r) { return r.state.phi(); }, "phi", *tr));
      series.push_back(collect([](const TraceRow& r) { return r.state.theta(); }, "theta", *tr));
      series.push_back(collect([](const TraceRow& r) { return r.state.psi(); }, "psi", *tr));
    }
    const std::string path = out_dir + "/angles.svg";
    write_line_plot(path, "Euler angles vs time", "t [s]", "angle [rad]", series);
    written.push_back(path);
  }
  {
    std::vector<PlotSeries> series;
    for (const SimTrace* tr : traces) {
      series.push_back(collect([](const TraceRow& r) { return r.input.u1; }, "u1", *tr));
      series.push_back(collect([](const TraceRow& r) { return r.input.u2; }, "u2", *tr));
      series.push_back(collect([](const TraceRow& r) { return r.input.u3; }, "u3", *tr));
      series.push_back(collect([](const TraceRow& r) { return r.input.u4; }, "u4", *tr));
    }
    const std::string path = out_dir + "/inputs.svg";
    write_line_plot(path, "Control inputs vs time", "t [s]", "u [N, N m]", series);
    written.push_back(path);
  }
  {
    std::vector<PlotSeries> series;
    const char* names[4] = {"V_phi", "V_theta", "V_psi", "V_z"};
    for (const SimTrace* tr : traces) {
      if (tr->rows.empty() || !tr->rows.front().lyapunov) continue;
      for (int k = 0; k < 4; ++k)
        series.push_back(collect(
            [k](const TraceRow& r) { return r.lyapunov ? (*r.lyapunov)[k].value : 0.0; },
            names[k], *tr));
    }
    if (!series.empty()) {
      const std::string path = out_dir + "/lyapunov.svg";
      write_line_plot(path, "Subsystem Lyapunov values vs time", "t [s]", "V",
                      series);
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace quadsim
