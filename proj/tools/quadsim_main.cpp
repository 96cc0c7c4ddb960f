// Command-line front end: run single or comparative simulations, verify the
// Lyapunov properties of a trace, render SVG plots, and write the default
// scenario file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "quadsim/quadsim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerifyFailed = 4;

struct GainOverrides {
  std::array<std::optional<double>, 8> c;
  std::optional<double> h;
  std::optional<double> horizon;
  std::optional<std::string> controller;
};

void apply(const GainOverrides& o, quadsim::ScenarioConfig& cfg) {
  for (int i = 0; i < 8; ++i)
    if (o.c[i]) cfg.gains.c[i] = *o.c[i];
  if (o.h) cfg.h = *o.h;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.controller) {
    if (*o.controller == "backstepping")
      cfg.controller = quadsim::ControllerKind::kBackstepping;
    else if (*o.controller == "pid")
      cfg.controller = quadsim::ControllerKind::kPid;
    else
      throw quadsim::ConfigError("controller must be 'backstepping' or 'pid'");
  }
}

void add_override_options(CLI::App* cmd, GainOverrides& o) {
  for (int i = 0; i < 8; ++i)
    cmd->add_option("--c" + std::to_string(i + 1), o.c[i],
                    "override backstepping gain c" + std::to_string(i + 1));
  cmd->set_help_flag("--help", "print help");  // frees -h for the step size
  cmd->add_option("--h", o.h, "integration step override [s]");
  cmd->add_option("--horizon", o.horizon, "horizon override [s]");
  cmd->add_option("--controller", o.controller,
                  "controller override: backstepping | pid")
      ->check(CLI::IsMember({"backstepping", "pid"}));
}

std::string fmt_settle(const std::optional<double>& s) {
  if (!s) return "not settled";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", *s);
  return buf;
}

void print_metrics(const quadsim::Metrics& m, const std::string& heading) {
  std::printf("%s\n", heading.c_str());
  std::printf("  %-6s %12s %12s %14s %12s %10s\n", "chan", "rmse", "peak",
              "settle [s]", "steady", "band");
  for (int ch = 0; ch < quadsim::kMetricChannels; ++ch) {
    const auto& c = m.channels[ch];
    std::printf("  %-6s %12.5g %12.5g %14s %12.5g %10.4g\n",
                quadsim::kMetricChannelName[ch], c.rmse, c.peak_after_onset,
                fmt_settle(c.settling_time).c_str(), c.steady_state_error,
                c.settling_band);
  }
  std::printf("  control effort [u^2 s]: u1=%.5g u2=%.5g u3=%.5g u4=%.5g\n",
              m.control_effort[0], m.control_effort[1], m.control_effort[2],
              m.control_effort[3]);
}

int finish_run(const quadsim::SimTrace& trace, const std::string& out_dir,
               bool write_csv, bool write_svg, bool quiet,
               std::optional<double> onset) {
  std::filesystem::create_directories(out_dir);
  if (write_csv) {
    const std::string path = out_dir + "/trace_" + trace.meta.controller + ".csv";
    quadsim::write_trace_csv(trace, path);
    if (!quiet) std::printf("wrote %s\n", path.c_str());
    if (!trace.rows.empty()) {
      const std::string mpath =
          out_dir + "/metrics_" + trace.meta.controller + ".csv";
      std::ofstream mout(mpath);
      if (!mout) throw quadsim::IoError("cannot write " + mpath);
      quadsim::write_metrics_csv(quadsim::compute_metrics(trace, onset), mout);
      if (!quiet) std::printf("wrote %s\n", mpath.c_str());
    }
  }
  if (write_svg) {
    for (const auto& p : quadsim::write_standard_plots({&trace}, out_dir))
      if (!quiet) std::printf("wrote %s\n", p.c_str());
  }
  const auto& term = trace.meta.termination;
  if (!quiet) {
    std::printf("controller=%s rows=%zu status=%s\n",
                trace.meta.controller.c_str(), trace.rows.size(),
                quadsim::to_string(term.status));
    if (!trace.rows.empty())
      print_metrics(quadsim::compute_metrics(trace, onset), "metrics:");
  }
  if (term.status != quadsim::RunStatus::kCompleted) {
    std::fprintf(stderr, "run terminated early at t=%.6g: %s\n", term.time,
                 term.detail.c_str());
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadrotor backstepping / PID simulation and analysis"};
  app.require_subcommand(1);

  // scenario-init
  auto* init_cmd =
      app.add_subcommand("scenario-init", "write the default scenario file");
  std::string init_out = "scenario.json";
  init_cmd->add_option("--out", init_out, "output path");

  // run
  auto* run_cmd = app.add_subcommand("run", "run one scenario");
  std::string run_scenario_path, run_out = ".";
  bool run_csv = false, run_svg = false, run_quiet = false;
  GainOverrides run_over;
  run_cmd->add_option("--scenario", run_scenario_path, "scenario file")->required();
  run_cmd->add_option("--out", run_out, "output directory");
  run_cmd->add_flag("--csv", run_csv, "write the trace CSV");
  run_cmd->add_flag("--svg", run_svg, "write SVG plots");
  run_cmd->add_flag("--quiet", run_quiet, "suppress normal output");
  add_override_options(run_cmd, run_over);

  // compare
  auto* cmp_cmd = app.add_subcommand(
      "compare", "run backstepping and PID on a shared scenario");
  std::string cmp_scenario_path, cmp_scenario_b, cmp_out = ".";
  bool cmp_csv = false, cmp_svg = false, cmp_quiet = false;
  GainOverrides cmp_over;
  cmp_cmd->add_option("--scenario", cmp_scenario_path, "scenario file")->required();
  cmp_cmd->add_option("--scenario-b", cmp_scenario_b,
                      "second scenario file (defaults to the first with the "
                      "other controller)");
  cmp_cmd->add_option("--out", cmp_out, "output directory");
  cmp_cmd->add_flag("--csv", cmp_csv, "write both trace CSVs");
  cmp_cmd->add_flag("--svg", cmp_svg, "write overlay SVG plots");
  cmp_cmd->add_flag("--quiet", cmp_quiet, "suppress normal output");
  add_override_options(cmp_cmd, cmp_over);

  // verify-lyapunov
  auto* ver_cmd = app.add_subcommand(
      "verify-lyapunov",
      "check monotonicity and the analytical derivative on a trace");
  std::string ver_scenario_path, ver_trace_path;
  bool ver_quiet = false;
  GainOverrides ver_over;
  ver_cmd->add_option("--scenario", ver_scenario_path,
                      "scenario to run and verify");
  ver_cmd->add_option("--trace", ver_trace_path, "existing trace CSV to verify");
  ver_cmd->add_flag("--quiet", ver_quiet, "suppress normal output");
  add_override_options(ver_cmd, ver_over);

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "render SVG plots from trace CSVs");
  std::string plot_trace_a, plot_trace_b, plot_out = ".";
  plot_cmd->add_option("--trace", plot_trace_a, "trace CSV")->required();
  plot_cmd->add_option("--trace-b", plot_trace_b, "second trace CSV (overlay)");
  plot_cmd->add_option("--out", plot_out, "output directory");

  try {
    app.parse(argc, argv);

    if (*init_cmd) {
      quadsim::save_scenario(quadsim::reference_scenario(), init_out);
      std::printf("wrote %s\n", init_out.c_str());
      return kExitOk;
    }

    if (*run_cmd) {
      quadsim::ScenarioConfig cfg = quadsim::load_scenario(run_scenario_path);
      apply(run_over, cfg);
      const quadsim::SimTrace trace =
          quadsim::run_scenario(cfg, quadsim::scenario_hash(cfg));
      std::optional<double> onset;
      if (cfg.disturbance) onset = cfg.disturbance->start_time;
      return finish_run(trace, run_out, run_csv, run_svg, run_quiet, onset);
    }

    if (*cmp_cmd) {
      quadsim::ScenarioConfig a = quadsim::load_scenario(cmp_scenario_path);
      apply(cmp_over, a);
      quadsim::ScenarioConfig b;
      if (!cmp_scenario_b.empty()) {
        b = quadsim::load_scenario(cmp_scenario_b);
      } else {
        b = a;
        b.controller = a.controller == quadsim::ControllerKind::kBackstepping
                           ? quadsim::ControllerKind::kPid
                           : quadsim::ControllerKind::kBackstepping;
      }
      const quadsim::ComparisonResult r = quadsim::compare_scenarios(a, b);
      std::filesystem::create_directories(cmp_out);
      if (cmp_csv) {
        quadsim::write_trace_csv(r.trace_a,
                                 cmp_out + "/trace_" + r.trace_a.meta.controller + ".csv");
        quadsim::write_trace_csv(r.trace_b,
                                 cmp_out + "/trace_" + r.trace_b.meta.controller + ".csv");
        std::ofstream cmp_table(cmp_out + "/comparison.csv");
        if (!cmp_table) throw quadsim::IoError("cannot write comparison.csv");
        quadsim::write_comparison_csv(r, cmp_table);
      }
      if (cmp_svg)
        quadsim::write_standard_plots({&r.trace_a, &r.trace_b}, cmp_out);
      if (!cmp_quiet) {
        print_metrics(r.metrics_a, "[A] " + r.trace_a.meta.controller);
        print_metrics(r.metrics_b, "[B] " + r.trace_b.meta.controller);
        std::printf("verdicts (smaller is better):\n");
        for (int ch = 0; ch < quadsim::kMetricChannels; ++ch) {
          const auto& ca = r.metrics_a.channels[ch];
          const auto& cb = r.metrics_b.channels[ch];
          const double sa = ca.settling_time.value_or(1e300);
          const double sb = cb.settling_time.value_or(1e300);
          const char* rm = ca.rmse < cb.rmse ? "A" : (cb.rmse < ca.rmse ? "B" : "tie");
          const char* st = sa < sb ? "A" : (sb < sa ? "B" : "tie");
          std::printf("  %-6s rmse: %s   settling: %s\n",
                      quadsim::kMetricChannelName[ch], rm, st);
        }
      }
      const bool a_bad =
          r.trace_a.meta.termination.status != quadsim::RunStatus::kCompleted;
      const bool b_bad =
          r.trace_b.meta.termination.status != quadsim::RunStatus::kCompleted;
      return (a_bad || b_bad) ? kExitNumerical : kExitOk;
    }

    if (*ver_cmd) {
      quadsim::SimTrace trace;
      quadsim::Gains gains;
      if (!ver_trace_path.empty()) {
        trace = quadsim::read_trace_csv(ver_trace_path);
        gains = quadsim::Gains(trace.meta.gains);
      } else if (!ver_scenario_path.empty()) {
        quadsim::ScenarioConfig cfg = quadsim::load_scenario(ver_scenario_path);
        apply(ver_over, cfg);
        cfg.controller = quadsim::ControllerKind::kBackstepping;
        trace = quadsim::run_scenario(cfg, quadsim::scenario_hash(cfg));
        gains = cfg.gains;
        if (trace.meta.termination.status != quadsim::RunStatus::kCompleted) {
          std::fprintf(stderr, "run terminated early at t=%.6g: %s\n",
                       trace.meta.termination.time,
                       trace.meta.termination.detail.c_str());
          return kExitNumerical;
        }
      } else {
        throw quadsim::ConfigError(
            "verify-lyapunov needs --scenario or --trace");
      }
      const quadsim::LyapunovReport rep = quadsim::verify_lyapunov(trace, gains);
      const bool ok = quadsim::lyapunov_report_passes(rep);
      if (!ver_quiet) {
        const char* names[4] = {"phi", "theta", "psi", "z"};
        std::printf("points checked: %ld\n", rep.points_checked);
        for (int k = 0; k < 4; ++k)
          std::printf(
              "  %-6s max monotonicity violation %.3e   max dV/dt mismatch "
              "%.3e rel (%.3e abs)\n",
              names[k], rep.subsystems[k].max_monotonicity_violation,
              rep.subsystems[k].max_rel_mismatch,
              rep.subsystems[k].max_abs_mismatch);
        for (const auto& [a, b] : rep.thrust_margin_dips)
          std::printf("  thrust margin dip: t in [%.4f, %.4f]\n", a, b);
        std::printf("lyapunov verification: %s\n", ok ? "PASS" : "FAIL");
      }
      return ok ? kExitOk : kExitVerifyFailed;
    }

    if (*plot_cmd) {
      const quadsim::SimTrace a = quadsim::read_trace_csv(plot_trace_a);
      std::filesystem::create_directories(plot_out);
      std::vector<const quadsim::SimTrace*> traces{&a};
      quadsim::SimTrace b;
      if (!plot_trace_b.empty()) {
        b = quadsim::read_trace_csv(plot_trace_b);
        traces.push_back(&b);
      }
      for (const auto& p : quadsim::write_standard_plots(traces, plot_out))
        std::printf("wrote %s\n", p.c_str());
      return kExitOk;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitConfig : kExitOk;
  } catch (const quadsim::ThrustSingularityError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const quadsim::NumericalBlowupError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const quadsim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
