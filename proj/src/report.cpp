#include "wave/report.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <memory>

namespace wave {

Json to_json(const Point<double>& p) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

Json to_json(const PotentialConstants<double>& k) {
  return Json{{"m", k.m}, {"point_a", to_json(k.point_a)}, {"M", k.M}, {"d", k.d}, {"mu", k.mu}};
}

Json to_json(const BoundsReport<double>& b) {
  return Json{{"c", b.c},
              {"lower", b.lower},
              {"upper", b.upper},
              {"bracket_lo", b.bracket_lo},
              {"bracket_hi", b.bracket_hi}};
}

Json to_json(const GammaResult<double>& r) {
  return Json{{"c", r.c},
              {"gamma", r.gamma},
              {"grad_norm", r.grad_norm},
              {"feasibility_violation", r.feasibility_violation},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"noise_limited", r.noise_limited},
              {"penalty_active", r.penalty_active},
              {"multistart_spread", r.multistart_spread},
              {"multistart_disagrees", r.multistart_spread > 1e-4},
              {"within_bounds", r.gamma >= r.bounds.lower - 1e-3 && r.gamma <= r.bounds.upper + 1e-3},
              {"bounds", to_json(r.bounds)},
              {"nodes", r.profile.size()}};
}

Json to_json(const SpeedResult<double>& r) {
  Json history = Json::array();
  for (const auto& s : r.history) {
    history.push_back(Json{{"c_lo", s.c_lo}, {"c_hi", s.c_hi}, {"gamma_lo", s.gamma_lo}, {"gamma_hi", s.gamma_hi}});
  }
  return Json{{"c_star", r.c_star},
              {"gamma_at_c_star", r.gamma_at_c_star},
              {"in_bracket", r.c_star >= r.bounds.bracket_lo - 1e-6 && r.c_star <= r.bounds.bracket_hi + 1e-6},
              {"warm_cold_gap", r.warm_cold_gap},
              {"all_converged", r.all_converged},
              {"evaluations", r.evaluations},
              {"wave_ok", r.wave_ok},
              {"bounds", to_json(r.bounds)},
              {"minimizer", to_json(r.minimizer)},
              {"history", history}};
}

Json to_json(const Check& c) {
  Json j{{"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}};
  if (!c.evaluated) j["skipped"] = true;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

Json to_json(const VerifyReport<double>& r) {
  Json j{{"c", r.c}, {"gamma_hat", r.gamma_hat}};
  for (const auto& [name, chk] : r.checks()) j[name] = to_json(*chk);
  j["decay_lambda_fit"] = r.decay_lambda_fit;
  j["decay_lambda_theory"] = r.decay_lambda_theory;
  j["left_tail_W_limit"] = r.left_tail_W_limit;
  j["dist_to_equilibria"] = r.dist_to_equilibria;
  j["nearest_equilibrium"] = r.nearest_equilibrium ? to_json(*r.nearest_equilibrium) : Json(nullptr);
  j["pass"] = r.pass;
  return j;
}

Json to_json(const RunConfig& cfg) {
  const PotentialConfig& p = cfg.potential;
  Json pot{{"variant", p.variant}};
  if (p.variant == "user_polynomial") {
    Json terms = Json::array();
    for (const auto& t : p.terms) terms.push_back(Json{{"coeff", t.coeff}, {"powers", t.powers}});
    pot["well_b"] = to_json(p.well_b);
    pot["terms"] = terms;
  } else {
    pot["alpha"] = p.alpha;
    if (p.variant == "decoupled_quartic") pot["beta"] = p.beta;
  }
  if (p.box) {
    pot["box_lo"] = to_json(p.box->lo);
    pot["box_hi"] = to_json(p.box->hi);
  }
  const GridConfig& g = cfg.grid;
  Json grid{{"h", g.h},
            {"x_left", g.x_left ? Json(*g.x_left) : Json("default")},
            {"x_right", g.x_right ? Json(*g.x_right) : Json("default")},
            {"refinement", g.refinement == Spacing::geometric ? "geometric" : "uniform"}};
  if (g.refinement == Spacing::geometric) {
    grid["ratio"] = g.ratio;
    grid["h_max"] = g.h_max;
  }
  const MinimizeOptions& s = cfg.solver;
  Json solver{{"opt_tol", s.opt_tol},       {"feas_tol", s.feas_tol},   {"penalty_kappa", s.penalty_kappa},
              {"max_iters", s.max_iters},   {"restarts", s.restarts},   {"perturbation", s.perturbation},
              {"seed", s.seed},             {"armijo_c1", s.armijo_c1}, {"shrink", s.shrink},
              {"proj_tol", s.projection.tol}};
  Json j{{"potential", pot}, {"grid", grid}, {"solver", solver}};
  j["bounds"] = Json{{"c", cfg.bounds_c ? Json(*cfg.bounds_c) : Json(nullptr)}};
  j["gamma"] = Json{{"c_list", cfg.gamma_c_list}, {"warm_start", cfg.gamma_warm_start}};
  j["speed"] = Json{{"c_tol", cfg.speed.c_tol},
                    {"expansion", cfg.speed.expansion},
                    {"max_expansions", cfg.speed.max_expansions},
                    {"warm_start", cfg.speed.warm_start},
                    {"gamma_zero_scale", cfg.speed.gamma_zero_scale}};
  j["verify"] = Json{{"c", cfg.verify_c ? Json(*cfg.verify_c) : Json(nullptr)},
                     {"gamma_hat", cfg.verify_gamma_hat},
                     {"profile", cfg.verify_profile}};
  j["output"] = Json{{"report", cfg.report_name}};
  return j;
}

std::string sha256_hex(const std::string& data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    throw Error(ErrorKind::contract_violation, "SHA-256 digest failed");
  }
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

void seal_report(Json& report) {
  Json covered{{"schema_version", report.at("schema_version")},
               {"command", report.at("command")},
               {"config", report.at("config")},
               {"results", report.at("results")}};
  report["config_digest"] = sha256_hex(report.at("config").dump());
  report["digest"] = sha256_hex(covered.dump());
}

}  // namespace wave
