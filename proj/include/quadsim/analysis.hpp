#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quadsim/backstepping.hpp"
#include "quadsim/errors.hpp"
#include "quadsim/scenario_io.hpp"
#include "quadsim/simulation.hpp"
#include "quadsim/trace_io.hpp"

namespace quadsim {

// Channels the tracking metrics are computed on.
inline constexpr int kMetricChannels = 6;
inline constexpr const char* kMetricChannelName[kMetricChannels] = {
    "x", "y", "z", "phi", "theta", "psi"};

struct ChannelMetrics {
  double rmse = 0.0;                       // over the whole trace
  double rmse_after_onset = 0.0;           // over t >= onset
  double peak_after_onset = 0.0;           // max |error| for t >= onset
  std::optional<double> settling_time;     // s after onset; nullopt = not settled
  double settling_band = 0.0;              // band halfwidth used
  double steady_state_error = 0.0;         // RMS over the final 10% of the horizon
};

struct Metrics {
  std::array<ChannelMetrics, kMetricChannels> channels{};
  std::array<double, 4> control_effort{};  // integral of u_i^2 dt
};

namespace detail {

inline double tracking_error(const TraceRow& r, int channel) {
  switch (channel) {
    case 0: return r.reference.x.value - r.state.x();
    case 1: return r.reference.y.value - r.state.y();
    case 2: return r.reference[Channel::kZ].value - r.state.z();
    case 3: return r.reference[Channel::kPhi].value - r.state.phi();
    case 4: return r.reference[Channel::kTheta].value - r.state.theta();
    default: return r.reference[Channel::kPsi].value - r.state.psi();
  }
}

}  // namespace detail

/// Tracking and effort metrics over a trace. The settling band halfwidth is
/// max(1.02 * pre-onset RMS error, 0.01); settling time is the first sample
/// after onset from which the error stays inside the band through the end.
/// With no onset the whole trace is treated as post-onset.
inline Metrics compute_metrics(const SimTrace& trace,
                               std::optional<double> disturbance_onset) {
  if (trace.rows.empty()) throw EmptyTraceError();
  const double t0 = trace.rows.front().t;
  const double onset = disturbance_onset.value_or(t0);

  Metrics m;
  const size_t n = trace.rows.size();
  for (int ch = 0; ch < kMetricChannels; ++ch) {
    std::vector<double> e(n);
    for (size_t i = 0; i < n; ++i) e[i] = detail::tracking_error(trace.rows[i], ch);

    double sum_sq = 0.0, pre_sq = 0.0, tail_sq = 0.0;
    size_t pre_n = 0, tail_n = 0;
    const double t_end = trace.rows.back().t;
    const double tail_start = t_end - 0.1 * (t_end - t0);
    size_t onset_idx = n;
    for (size_t i = 0; i < n; ++i) {
      const double t = trace.rows[i].t;
      sum_sq += e[i] * e[i];
      if (t < onset) {
        pre_sq += e[i] * e[i];
        ++pre_n;
      } else if (onset_idx == n) {
        onset_idx = i;
      }
      if (t >= tail_start) {
        tail_sq += e[i] * e[i];
        ++tail_n;
      }
    }
    ChannelMetrics& cm = m.channels[ch];
    cm.rmse = std::sqrt(sum_sq / n);
    cm.steady_state_error = tail_n ? std::sqrt(tail_sq / tail_n) : 0.0;
    const double pre_rms = pre_n ? std::sqrt(pre_sq / pre_n) : 0.0;
    cm.settling_band = std::max(1.02 * pre_rms, 0.01);

    if (onset_idx < n) {
      double peak = 0.0, post_sq = 0.0;
      for (size_t i = onset_idx; i < n; ++i) {
        peak = std::max(peak, std::abs(e[i]));
        post_sq += e[i] * e[i];
      }
      cm.peak_after_onset = peak;
      cm.rmse_after_onset = std::sqrt(post_sq / static_cast<double>(n - onset_idx));
      // earliest index from which the error never leaves the band
      size_t first_ok = n;
      for (size_t i = n; i-- > onset_idx;) {
        if (std::abs(e[i]) <= cm.settling_band) first_ok = i;
        else break;
      }
      if (first_ok < n)
        cm.settling_time = trace.rows[first_ok].t - onset;
    }
  }

  for (size_t i = 0; i + 1 < n; ++i) {
    const double dt = trace.rows[i + 1].t - trace.rows[i].t;
    const ControlInput& a = trace.rows[i].input;
    const ControlInput& b = trace.rows[i + 1].input;
    const double ua[4] = {a.u1, a.u2, a.u3, a.u4};
    const double ub[4] = {b.u1, b.u2, b.u3, b.u4};
    for (int k = 0; k < 4; ++k)
      m.control_effort[k] += 0.5 * (ua[k] * ua[k] + ub[k] * ub[k]) * dt;
  }
  return m;
}

struct SubsystemLyapunovReport {
  double max_monotonicity_violation = 0.0;  // max positive jump of V per step
  double max_rel_mismatch = 0.0;   // |fd - analytic| / max(|analytic|, 1e-6)
  double max_abs_mismatch = 0.0;
};

struct LyapunovReport {
  std::array<SubsystemLyapunovReport, 4> subsystems{};
  // spans of time where |cos(phi)cos(theta)| dipped below 10x the tolerance
  std::vector<std::pair<double, double>> thrust_margin_dips;
  long points_checked = 0;
};

/// Checks the recorded Lyapunov values against the analytical derivative on
/// undisturbed interior points (central differences need both neighbours
/// free of disturbance force). Pure function of the trace and gains.
inline LyapunovReport verify_lyapunov(const SimTrace& trace, const Gains& gains,
                                      double singularity_tol = 1e-3) {
  if (trace.meta.controller != "backstepping")
    throw WrongControllerError(
        "lyapunov verification requires a backstepping trace, got '" +
        trace.meta.controller + "'");
  if (trace.rows.empty()) throw EmptyTraceError();

  LyapunovReport report;
  const auto& rows = trace.rows;
  auto undisturbed = [&](size_t i) {
    return rows[i].disturbance_force.isZero(0.0);
  };
  auto v_of = [&](size_t i, int k) -> double {
    if (!rows[i].lyapunov)
      throw WrongControllerError("trace rows carry no Lyapunov columns");
    return (*rows[i].lyapunov)[k].value;
  };

  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    if (!(undisturbed(i) && undisturbed(i + 1))) continue;
    for (int k = 0; k < 4; ++k) {
      const double jump = v_of(i + 1, k) - v_of(i, k);
      report.subsystems[k].max_monotonicity_violation =
          std::max(report.subsystems[k].max_monotonicity_violation, jump);
    }
  }

  for (size_t i = 1; i + 1 < rows.size(); ++i) {
    if (!(undisturbed(i - 1) && undisturbed(i) && undisturbed(i + 1))) continue;
    const double dt = rows[i + 1].t - rows[i - 1].t;
    ++report.points_checked;
    for (int k = 0; k < 4; ++k) {
      const double fd = (v_of(i + 1, k) - v_of(i - 1, k)) / dt;
      const auto& e = rows[i].errors->e;
      const double analytic = -gains.c[2 * k] * e[2 * k] * e[2 * k] -
                              gains.c[2 * k + 1] * e[2 * k + 1] * e[2 * k + 1];
      const double abs_err = std::abs(fd - analytic);
      report.subsystems[k].max_abs_mismatch =
          std::max(report.subsystems[k].max_abs_mismatch, abs_err);
      report.subsystems[k].max_rel_mismatch =
          std::max(report.subsystems[k].max_rel_mismatch,
                   abs_err / std::max(std::abs(analytic), 1e-6));
    }
  }

  bool in_dip = false;
  double dip_start = 0.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    const double margin =
        std::abs(std::cos(rows[i].state.phi()) * std::cos(rows[i].state.theta()));
    if (margin < 10.0 * singularity_tol) {
      if (!in_dip) {
        in_dip = true;
        dip_start = rows[i].t;
      }
    } else if (in_dip) {
      report.thrust_margin_dips.emplace_back(dip_start, rows[i].t);
      in_dip = false;
    }
  }
  if (in_dip) report.thrust_margin_dips.emplace_back(dip_start, rows.back().t);
  return report;
}

inline bool lyapunov_report_passes(const LyapunovReport& r,
                                   double mono_tol = 1e-9,
                                   double rel_tol = 1e-3) {
  for (const auto& s : r.subsystems)
    if (s.max_monotonicity_violation > mono_tol || s.max_rel_mismatch > rel_tol)
      return false;
  return true;
}

struct ComparisonResult {
  SimTrace trace_a, trace_b;
  Metrics metrics_a, metrics_b;
  std::optional<double> onset;
};

/// Runs two scenarios that share plant, trajectory, disturbance and grid,
/// typically differing in controller, and computes their metrics. The two
/// simulations run concurrently.
inline ComparisonResult compare_scenarios(const ScenarioConfig& a,
                                          const ScenarioConfig& b) {
  const json ja = to_json(a), jb = to_json(b);
  for (const char* key : {"plant", "trajectory", "disturbance", "integration",
                          "outer_loop"}) {
    const json va = ja.contains(key) ? ja.at(key) : json();
    const json vb = jb.contains(key) ? jb.at(key) : json();
    if (va != vb)
      throw MismatchedScenarioError(std::string("scenarios differ in '") + key +
                                    "'; comparison requires a shared setup");
  }
  auto run_a = std::async(std::launch::async,
                          [&] { return run_scenario(a, scenario_hash(a)); });
  ComparisonResult r;
  r.trace_b = run_scenario(b, scenario_hash(b));
  r.trace_a = run_a.get();
  if (a.disturbance) r.onset = a.disturbance->start_time;
  r.metrics_a = compute_metrics(r.trace_a, r.onset);
  r.metrics_b = compute_metrics(r.trace_b, r.onset);
  return r;
}

namespace detail {

inline void metrics_rows(std::string& out, const Metrics& m,
                         const Metrics* second) {
  const std::pair<const char*, double ChannelMetrics::*> fields[] = {
      {"rmse", &ChannelMetrics::rmse},
      {"rmse_after_onset", &ChannelMetrics::rmse_after_onset},
      {"peak_after_onset", &ChannelMetrics::peak_after_onset},
      {"settling_band", &ChannelMetrics::settling_band},
      {"steady_state_error", &ChannelMetrics::steady_state_error}};
  for (int ch = 0; ch < kMetricChannels; ++ch) {
    for (const auto& [name, member] : fields) {
      out += kMetricChannelName[ch];
      out += ',';
      out += name;
      out += ',';
      append_double(out, m.channels[ch].*member);
      if (second) {
        out += ',';
        append_double(out, second->channels[ch].*member);
      }
      out += '\n';
    }
    out += kMetricChannelName[ch];
    out += ",settling_time,";
    if (m.channels[ch].settling_time)
      append_double(out, *m.channels[ch].settling_time);
    if (second) {
      out += ',';
      if (second->channels[ch].settling_time)
        append_double(out, *second->channels[ch].settling_time);
    }
    out += '\n';
  }
  for (int k = 0; k < 4; ++k) {
    out += 'u';
    out += static_cast<char>('1' + k);
    out += ",control_effort,";
    append_double(out, m.control_effort[k]);
    if (second) {
      out += ',';
      append_double(out, second->control_effort[k]);
    }
    out += '\n';
  }
}

}  // namespace detail

/// Long-form metrics table: channel,metric,value. Not-settled entries are
/// left empty.
inline void write_metrics_csv(const Metrics& m, std::ostream& out) {
  std::string s = "channel,metric,value\n";
  detail::metrics_rows(s, m, nullptr);
  out << s;
}

/// Side-by-side table for a comparison run: channel,metric,<a>,<b> with the
/// controller names in the header.
inline void write_comparison_csv(const ComparisonResult& r, std::ostream& out) {
  std::string s = "channel,metric," + r.trace_a.meta.controller + "," +
                  r.trace_b.meta.controller + "\n";
  detail::metrics_rows(s, r.metrics_a, &r.metrics_b);
  out << s;
}

}  // namespace quadsim
