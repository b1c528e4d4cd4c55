#include "wave/commands.hpp"

#include "wave/csv.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace wave {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string out_dir(const RunConfig& cfg, const CommandOptions& opts) {
  const std::string dir = opts.out_dir.value_or(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Json base_report(const std::string& command, const RunConfig& cfg) {
  return Json{{"schema_version", kSchemaVersion},
              {"tool_version", kToolVersion},
              {"command", command},
              {"config", to_json(cfg)}};
}

void finish(CommandResult& res, const std::string& dir, const RunConfig& cfg, double elapsed) {
  res.report["timings"] = Json{{"total_seconds", elapsed}};
  seal_report(res.report);
  res.report_path = (std::filesystem::path(dir) / cfg.report_name).string();
  std::ofstream out(res.report_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config_error, "cannot write report '" + res.report_path + "'");
  out << res.report.dump(2) << "\n";
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config_error, "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

struct Setup {
  PotentialSpec<double> spec;
  PotentialConstants<double> consts;
};

Setup setup(const RunConfig& cfg) {
  Setup s{make_potential(cfg.potential), {}};
  s.consts = compute_constants(s.spec);
  return s;
}

std::string c_tag(double c) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", c);
  return buf;
}

void print_verify(const VerifyReport<double>& v) {
  std::printf("%-22s %12s %12s  %s\n", "check", "value", "threshold", "result");
  for (const auto& [name, chk] : v.checks()) {
    const char* verdict = !chk->evaluated ? "skip" : chk->pass ? "pass" : "FAIL";
    std::printf("%-22s %12.4e %12.4e  %s", name.c_str(), chk->value, chk->threshold, verdict);
    if (!chk->note.empty()) std::printf("  (%s)", chk->note.c_str());
    std::printf("\n");
  }
  std::printf("decay rate fit %.6f, theory %.6f\n", v.decay_lambda_fit, v.decay_lambda_theory);
  std::printf("left end: W = %.6g, distance to nearest equilibrium %.3e\n", v.left_tail_W_limit,
              v.dist_to_equilibria);
}

Json left_tail_json(const RunConfig& cfg, const VerifyReport<double>& v) {
  Json j{{"W_limit", v.left_tail_W_limit}, {"dist_to_equilibria", v.dist_to_equilibria}};
  if (v.nearest_equilibrium) {
    j["nearest_equilibrium"] = to_json(*v.nearest_equilibrium);
    j["well"] = well_label(cfg.potential, *v.nearest_equilibrium);
  }
  return j;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config_error:
    case ErrorKind::csv_error:
    case ErrorKind::contract_violation:
    case ErrorKind::assumption_violation:
      return kExitConfig;
    case ErrorKind::not_a_wave:
    case ErrorKind::tail_error:
    case ErrorKind::shooting_divergence:
      return kExitVerify;
    default:
      return kExitSolver;
  }
}

std::string well_label(const PotentialConfig& cfg, const Point<double>& e) {
  if (cfg.variant == "decoupled_quartic" && e.size() == 2) {
    const bool u_minus = std::abs(e[0] + 1) < 1e-3, v_minus = std::abs(e[1] + 1) < 1e-3;
    const bool u_plus = std::abs(e[0] - 1) < 1e-3, v_plus = std::abs(e[1] - 1) < 1e-3;
    if (u_minus && v_plus) return "a1";
    if (u_plus && v_minus) return "a2";
    if (u_minus && v_minus) return "a3";
  }
  std::ostringstream s;
  s << "(";
  for (Eigen::Index i = 0; i < e.size(); ++i) s << (i ? ", " : "") << e[i];
  s << ")";
  return s.str();
}

CommandResult cmd_bounds(const RunConfig& cfg, const CommandOptions& opts) {
  const auto t0 = Clock::now();
  CommandResult res;
  const Setup s = setup(cfg);
  const std::string dir = out_dir(cfg, opts);
  const BoundsReport<double> b = compute_bounds(s.spec, s.consts, cfg.bounds_c.value_or(1.0));
  Json results{{"constants", to_json(s.consts)},
               {"bracket", Json{{"c_lo", b.bracket_lo}, {"c_hi", b.bracket_hi}}}};
  if (cfg.bounds_c) results["bounds"] = to_json(b);
  res.report = base_report("bounds", cfg);
  res.report["results"] = results;
  if (!opts.quiet) {
    std::printf("potential      %s (dim %d)\n", s.spec.name.c_str(), s.spec.dim);
    std::printf("m              %.10g\n", s.consts.m);
    std::printf("M              %.10g\n", s.consts.M);
    std::printf("d              %.10g\n", s.consts.d);
    std::printf("mu             %.10g\n", s.consts.mu);
    std::printf("c* bracket     [%.10g, %.10g]\n", b.bracket_lo, b.bracket_hi);
    if (cfg.bounds_c) std::printf("gamma(%g) in   [%.10g, %.10g]\n", *cfg.bounds_c, b.lower, b.upper);
  }
  finish(res, dir, cfg, seconds_since(t0));
  return res;
}

CommandResult cmd_gamma(const RunConfig& cfg, const CommandOptions& opts) {
  if (cfg.gamma_c_list.empty()) {
    throw Error(ErrorKind::config_error, cfg.path + ": [gamma] c or c_list is required");
  }
  const auto t0 = Clock::now();
  CommandResult res;
  const Setup s = setup(cfg);
  const std::string dir = out_dir(cfg, opts);
  const Grid<double> grid = make_grid(cfg.grid, s.spec, s.consts);
  const auto curve = gamma_curve(s.spec, s.consts, grid, cfg.gamma_c_list, cfg.solver, cfg.gamma_warm_start, opts.jobs);

  Json points = Json::array();
  std::vector<std::vector<double>> rows;
  bool ok = true;
  if (!opts.quiet) std::printf("%12s %16s %12s %12s %8s\n", "c", "gamma", "grad_norm", "feasibility", "iters");
  for (const auto& pt : curve) {
    if (!pt.result) {
      ok = false;
      points.push_back(Json{{"c", pt.c}, {"error", pt.error}});
      if (!opts.quiet) std::printf("%12.6g  error: %s\n", pt.c, pt.error.c_str());
      continue;
    }
    const auto& r = *pt.result;
    ok = ok && r.converged;
    const std::string name = "profile_c" + c_tag(pt.c) + ".csv";
    write_profile_csv((std::filesystem::path(dir) / name).string(), s.spec, r.profile);
    Json j = to_json(r);
    j["profile_csv"] = name;
    points.push_back(j);
    rows.push_back({pt.c, r.gamma, r.grad_norm, r.feasibility_violation});
    if (!opts.quiet) {
      std::printf("%12.6g %16.8e %12.3e %12.3e %8ld%s\n", pt.c, r.gamma, r.grad_norm, r.feasibility_violation,
                  r.iterations, r.converged ? "" : "  (not converged)");
    }
  }
  write_table_csv((std::filesystem::path(dir) / "gamma.csv").string(), {"c", "gamma", "grad_norm", "feasibility"},
                  rows);
  res.report = base_report("gamma", cfg);
  res.report["results"] = Json{{"constants", to_json(s.consts)},
                               {"grid", Json{{"x_left", grid.x_left()}, {"x_right", grid.x_right()},
                                             {"nodes", grid.size()}}},
                               {"points", points}};
  res.exit_code = ok ? kExitOk : kExitSolver;
  finish(res, dir, cfg, seconds_since(t0));
  return res;
}

CommandResult cmd_speed(const RunConfig& cfg, const CommandOptions& opts) {
  const auto t0 = Clock::now();
  CommandResult res;
  const Setup s = setup(cfg);
  const std::string dir = out_dir(cfg, opts);
  const Grid<double> grid = make_grid(cfg.grid, s.spec, s.consts);
  SpeedResult<double> sp = find_speed(s.spec, s.consts, grid, cfg.solver, cfg.speed);
  const double t_solve = seconds_since(t0);

  VerifyThresholds th;
  const VerifyReport<double> v =
      verify_profile(s.spec, s.consts, sp.c_star, sp.gamma_at_c_star, sp.profile, th, cfg.speed,
                     cfg.solver.projection.tol);
  sp.wave_ok = v.pass;

  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  write_profile_csv(path("wave.csv"), s.spec, sp.profile);
  std::vector<std::vector<double>> rows;
  for (const auto& h : sp.history) rows.push_back({h.c_lo, h.c_hi, h.gamma_lo, h.gamma_hi});
  write_table_csv(path("bracket.csv"), {"c_lo", "c_hi", "gamma_lo", "gamma_hi"}, rows);
  write_json(path("verify.json"), to_json(v));

  res.report = base_report("speed", cfg);
  res.report["results"] = Json{{"constants", to_json(s.consts)},
                               {"grid", Json{{"x_left", grid.x_left()}, {"x_right", grid.x_right()},
                                             {"nodes", grid.size()}}},
                               {"speed", to_json(sp)},
                               {"left_tail", left_tail_json(cfg, v)},
                               {"verify", to_json(v)},
                               {"files", Json{{"wave", "wave.csv"}, {"bracket", "bracket.csv"}, {"verify", "verify.json"}}}};
  res.exit_code = !sp.minimizer.converged ? kExitSolver : v.pass ? kExitOk : kExitVerify;
  if (!opts.quiet) {
    std::printf("c*             %.8f   (bracket [%.6f, %.6f], %ld minimizations, %.1f s)\n", sp.c_star,
                sp.bounds.bracket_lo, sp.bounds.bracket_hi, sp.evaluations, t_solve);
    std::printf("gamma(c*)      %.4e   warm/cold gap %.2e\n", sp.gamma_at_c_star, sp.warm_cold_gap);
    if (v.nearest_equilibrium) {
      std::printf("left end       near %s\n", well_label(cfg.potential, *v.nearest_equilibrium).c_str());
    }
    print_verify(v);
    std::printf("verdict        %s\n", v.pass ? "wave verified" : "verification failed");
  }
  finish(res, dir, cfg, seconds_since(t0));
  return res;
}

CommandResult cmd_verify(const RunConfig& cfg, const CommandOptions& opts) {
  if (cfg.verify_profile.empty()) throw Error(ErrorKind::config_error, cfg.path + ": [verify] profile is required");
  if (!cfg.verify_c) throw Error(ErrorKind::config_error, cfg.path + ": [verify] c is required");
  const auto t0 = Clock::now();
  CommandResult res;
  const Setup s = setup(cfg);
  const std::string dir = out_dir(cfg, opts);
  const Profile<double> p = read_profile_csv(resolve_path(cfg, cfg.verify_profile), s.spec.dim, s.spec.well_b);
  const VerifyReport<double> v =
      verify_profile(s.spec, s.consts, *cfg.verify_c, cfg.verify_gamma_hat, p, VerifyThresholds{}, cfg.speed,
                     cfg.solver.projection.tol);
  write_json((std::filesystem::path(dir) / "verify.json").string(), to_json(v));
  res.report = base_report("verify", cfg);
  res.report["results"] = Json{{"constants", to_json(s.consts)},
                               {"nodes", p.size()},
                               {"left_tail", left_tail_json(cfg, v)},
                               {"verify", to_json(v)}};
  res.exit_code = v.pass ? kExitOk : kExitVerify;
  if (!opts.quiet) {
    print_verify(v);
    std::printf("verdict        %s\n", v.pass ? "wave verified" : "verification failed");
  }
  finish(res, dir, cfg, seconds_since(t0));
  return res;
}

CommandResult run_command(const std::string& command, const CommandOptions& opts) {
  CommandResult res;
  try {
    const RunConfig cfg = load_config(opts.config_path);
    if (command == "bounds") return cmd_bounds(cfg, opts);
    if (command == "gamma") return cmd_gamma(cfg, opts);
    if (command == "speed") return cmd_speed(cfg, opts);
    if (command == "verify") return cmd_verify(cfg, opts);
    throw Error(ErrorKind::config_error, "unknown command '" + command + "'");
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.kind());
    res.error = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    res.exit_code = kExitConfig;
    res.error = e.what();
  }
  std::cerr << "wave " << command << ": " << res.error << "\n";
  return res;
}

}  // namespace wave
