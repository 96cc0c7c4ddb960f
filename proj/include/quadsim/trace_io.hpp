#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "quadsim/errors.hpp"
#include "quadsim/simulation.hpp"

namespace quadsim {

// Fixed CSV column order. Ref columns follow the channel order
// (phi, theta, psi, z) with value/rate/accel each, then desired x and y.
inline const char* kTraceHeader =
    "t,x1,x2,x3,x4,x5,x6,x7,x8,x9,x10,x11,x12,"
    "u1,u2,u3,u4,"
    "ref_phi,ref_phi_rate,ref_phi_accel,"
    "ref_theta,ref_theta_rate,ref_theta_accel,"
    "ref_psi,ref_psi_rate,ref_psi_accel,"
    "ref_z,ref_z_rate,ref_z_accel,"
    "ref_x,ref_x_rate,ref_x_accel,"
    "ref_y,ref_y_rate,ref_y_accel,"
    "e1,e2,e3,e4,e5,e6,e7,e8,"
    "V_phi,V_theta,V_psi,V_z,"
    "fdx,fdy,fdz";

namespace detail {

// Shortest decimal representation that parses back to the identical double.
inline void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("malformed numeric field: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline void write_trace_csv(const SimTrace& trace, std::ostream& out) {
  char buf[64];
  out << "# quadsim-trace v1\n";
  out << "# controller=" << trace.meta.controller << "\n";
  std::string line = "# h=";
  detail::append_double(line, trace.meta.h);
  out << line << "\n";
  std::snprintf(buf, sizeof(buf), "# scenario_hash=%016llx",
                static_cast<unsigned long long>(trace.meta.scenario_hash));
  out << buf << "\n";
  line = "# gains=";
  for (int i = 0; i < 8; ++i) {
    if (i) line += ',';
    detail::append_double(line, trace.meta.gains[i]);
  }
  out << line << "\n";
  out << "# status=" << to_string(trace.meta.termination.status) << "\n";
  line = "# status_time=";
  detail::append_double(line, trace.meta.termination.time);
  out << line << "\n";
  out << kTraceHeader << "\n";

  for (const TraceRow& r : trace.rows) {
    line.clear();
    detail::append_double(line, r.t);
    for (int i = 0; i < 12; ++i) {
      line += ',';
      detail::append_double(line, r.state.v[i]);
    }
    for (double u : {r.input.u1, r.input.u2, r.input.u3, r.input.u4}) {
      line += ',';
      detail::append_double(line, u);
    }
    for (const ChannelReference* cr :
         {&r.reference.channels[0], &r.reference.channels[1],
          &r.reference.channels[2], &r.reference.channels[3], &r.reference.x,
          &r.reference.y}) {
      for (double v : {cr->value, cr->rate, cr->accel}) {
        line += ',';
        detail::append_double(line, v);
      }
    }
    for (int i = 0; i < 8; ++i) {
      line += ',';
      if (r.errors) detail::append_double(line, r.errors->e[i]);
    }
    for (int k = 0; k < 4; ++k) {
      line += ',';
      if (r.lyapunov) detail::append_double(line, (*r.lyapunov)[k].value);
    }
    for (int i = 0; i < 3; ++i) {
      line += ',';
      detail::append_double(line, r.disturbance_force[i]);
    }
    out << line << "\n";
  }
}

inline void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file: " + path);
  write_trace_csv(trace, out);
  if (!out) throw IoError("failed while writing trace file: " + path);
}

inline SimTrace read_trace_csv(std::istream& in) {
  SimTrace trace;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "controller") trace.meta.controller = value;
      else if (key == "h") trace.meta.h = detail::parse_double(value);
      else if (key == "scenario_hash")
        trace.meta.scenario_hash = std::stoull(value, nullptr, 16);
      else if (key == "gains") {
        const auto parts = detail::split(value, ',');
        if (parts.size() != 8) throw IoError("gains metadata needs 8 values");
        for (int i = 0; i < 8; ++i)
          trace.meta.gains[i] = detail::parse_double(parts[i]);
      } else if (key == "status") {
        if (value == "completed")
          trace.meta.termination.status = RunStatus::kCompleted;
        else if (value == "thrust_singularity")
          trace.meta.termination.status = RunStatus::kThrustSingularity;
        else if (value == "numerical_blowup")
          trace.meta.termination.status = RunStatus::kNumericalBlowup;
        else throw IoError("unknown status: " + value);
      } else if (key == "status_time") {
        trace.meta.termination.time = detail::parse_double(value);
      }
      continue;
    }
    if (!header_seen) {
      if (line != kTraceHeader)
        throw IoError("unexpected trace header: " + line);
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 50)
      throw IoError("expected 50 columns, got " + std::to_string(f.size()));
    TraceRow r;
    int i = 0;
    r.t = detail::parse_double(f[i++]);
    for (int k = 0; k < 12; ++k) r.state.v[k] = detail::parse_double(f[i++]);
    r.input.u1 = detail::parse_double(f[i++]);
    r.input.u2 = detail::parse_double(f[i++]);
    r.input.u3 = detail::parse_double(f[i++]);
    r.input.u4 = detail::parse_double(f[i++]);
    for (ChannelReference* cr :
         {&r.reference.channels[0], &r.reference.channels[1],
          &r.reference.channels[2], &r.reference.channels[3], &r.reference.x,
          &r.reference.y}) {
      cr->value = detail::parse_double(f[i++]);
      cr->rate = detail::parse_double(f[i++]);
      cr->accel = detail::parse_double(f[i++]);
    }
    if (!f[i].empty()) {
      BacksteppingErrors errs;
      for (int k = 0; k < 8; ++k) errs.e[k] = detail::parse_double(f[i++]);
      std::array<LyapunovValue, 4> lv{};
      for (int k = 0; k < 4; ++k) lv[k].value = detail::parse_double(f[i++]);
      // derivative column is not serialized; rebuild from errors and gains
      for (int k = 0; k < 4; ++k)
        lv[k].derivative = -trace.meta.gains[2 * k] * errs.e[2 * k] * errs.e[2 * k] -
                           trace.meta.gains[2 * k + 1] * errs.e[2 * k + 1] * errs.e[2 * k + 1];
      r.errors = errs;
      r.lyapunov = lv;
    } else {
      i += 12;
    }
    for (int k = 0; k < 3; ++k) r.disturbance_force[k] = detail::parse_double(f[i++]);
    trace.rows.push_back(std::move(r));
  }
  if (!header_seen) throw IoError("trace file has no header row");
  return trace;
}

inline SimTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  return read_trace_csv(in);
}

}  // namespace quadsim
