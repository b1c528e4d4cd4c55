#ifndef WAVE_SPEED_HPP
#define WAVE_SPEED_HPP

#include "wave/functional.hpp"
#include "wave/minimize.hpp"
#include "wave/potential.hpp"
#include "wave/profile.hpp"
#include "wave/types.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace wave {

struct SpeedOptions {
  double c_tol = 1e-3;
  double expansion = 1.5;
  int max_expansions = 6;
  /// gamma_zero_tol = gamma_zero_scale * (1 + m / c)
  double gamma_zero_scale = 5e-3;
  bool warm_start = true;
  bool probe_restarts = false;  ///< multi-start at every bisection probe, not only at c_star
};

template <typename Scalar>
struct BracketStep {
  Scalar c_lo{}, c_hi{};
  Scalar gamma_lo{}, gamma_hi{};
};

template <typename Scalar>
struct SpeedResult {
  Scalar c_star{};
  Scalar gamma_at_c_star{};
  std::vector<BracketStep<Scalar>> history;
  Profile<Scalar> profile;
  GammaResult<Scalar> minimizer;  ///< cold-start run at c_star
  BoundsReport<Scalar> bounds;
  Scalar warm_cold_gap{};         ///< |gamma warm - gamma cold| at c_star
  bool all_converged = true;
  long evaluations = 0;
  bool wave_ok = false;           ///< filled in by the caller after verification
};

template <typename Scalar>
Scalar gamma_zero_tol(const PotentialConstants<Scalar>& consts, Scalar c, const SpeedOptions& sopts = {}) {
  return Scalar(sopts.gamma_zero_scale) * (1 + consts.m / c);
}

/// Grid long enough for every speed in the analytic bracket: the left end sits
/// `left_decay` e-foldings of e^{c x} out at the slowest bracket speed, the
/// right end `right_decay` e-foldings of the slowest weighted tail energy
/// e^{(c - 2 Lambda) x}.
template <typename Scalar>
Grid<Scalar> default_grid(const PotentialSpec<Scalar>& spec, const PotentialConstants<Scalar>& consts, Scalar h,
                          Scalar left_decay = 30, Scalar right_decay = 40) {
  const BoundsReport<Scalar> b = compute_bounds(spec, consts, Scalar(1));
  const Scalar c = b.bracket_lo;
  return Grid<Scalar>::uniform(-left_decay / c, right_decay / std::sqrt(c * c + 4 * consts.mu), h);
}

/// Root of gamma by bisection inside the analytic bracket, expanded by a
/// constant factor when an endpoint has the wrong sign.
template <typename Scalar>
SpeedResult<Scalar> find_speed(const PotentialSpec<Scalar>& spec, const PotentialConstants<Scalar>& consts,
                               const Grid<Scalar>& grid, const MinimizeOptions& mopts = {},
                               const SpeedOptions& sopts = {}) {
  if (!(sopts.c_tol > 0)) throw Error(ErrorKind::contract_violation, "c_tol must be positive");
  SpeedResult<Scalar> out;
  const BoundsReport<Scalar> b0 = compute_bounds(spec, consts, Scalar(1));
  Scalar lo = b0.bracket_lo, hi = b0.bracket_hi;
  const Profile<Scalar> cold = initial_profile(spec, consts, grid);

  // Probes only need the sign of gamma; the multi-start budget goes to c_star.
  MinimizeOptions probe_opts = mopts;
  if (!sopts.probe_restarts) probe_opts.restarts = 0;
  auto eval = [&](Scalar c, const Profile<Scalar>& start, const MinimizeOptions& o) {
    GammaResult<Scalar> r = minimize_profile(spec, consts, c, start, o);
    ++out.evaluations;
    out.all_converged = out.all_converged && r.converged;
    return r;
  };

  std::ostringstream probes;
  auto fail = [&]() {
    throw Error(ErrorKind::bracket_failure, "no sign change of gamma found; probes:" + probes.str());
  };
  auto note = [&](Scalar c, Scalar g) { probes << " (c=" << double(c) << ", gamma=" << double(g) << ")"; };

  GammaResult<Scalar> r_lo = eval(lo, cold, probe_opts);
  note(lo, r_lo.gamma);
  for (int k = 0; r_lo.gamma >= 0; ++k) {
    if (k == sopts.max_expansions) fail();
    lo /= Scalar(sopts.expansion);
    r_lo = eval(lo, sopts.warm_start ? r_lo.profile : cold, probe_opts);
    note(lo, r_lo.gamma);
  }
  GammaResult<Scalar> r_hi = eval(hi, cold, probe_opts);
  note(hi, r_hi.gamma);
  for (int k = 0; r_hi.gamma <= 0; ++k) {
    if (k == sopts.max_expansions) fail();
    hi *= Scalar(sopts.expansion);
    r_hi = eval(hi, sopts.warm_start ? r_hi.profile : cold, probe_opts);
    note(hi, r_hi.gamma);
  }
  out.history.push_back({lo, hi, r_lo.gamma, r_hi.gamma});

  while (hi - lo > Scalar(sopts.c_tol)) {
    const Scalar mid = (lo + hi) / 2;
    // Start from the endpoint minimizer closer in gamma to zero.
    const Profile<Scalar>& start =
        !sopts.warm_start ? cold : (-r_lo.gamma < r_hi.gamma ? r_lo.profile : r_hi.profile);
    GammaResult<Scalar> r = eval(mid, start, probe_opts);
    if (r.gamma < 0) {
      lo = mid;
      r_lo = std::move(r);
    } else {
      hi = mid;
      r_hi = std::move(r);
    }
    out.history.push_back({lo, hi, r_lo.gamma, r_hi.gamma});
  }

  out.c_star = (lo + hi) / 2;
  const GammaResult<Scalar> warm = eval(out.c_star, -r_lo.gamma < r_hi.gamma ? r_lo.profile : r_hi.profile, mopts);
  out.minimizer = eval(out.c_star, cold, mopts);
  out.warm_cold_gap = std::abs(warm.gamma - out.minimizer.gamma);
  if (warm.gamma < out.minimizer.gamma) out.minimizer = warm;
  out.gamma_at_c_star = out.minimizer.gamma;
  out.profile = out.minimizer.profile;
  out.bounds = compute_bounds(spec, consts, out.c_star);
  return out;
}

/// Minimizer at speed c, rejected unless gamma(c) is zero within tolerance.
template <typename Scalar>
Profile<Scalar> wave_at_speed(const PotentialSpec<Scalar>& spec, const PotentialConstants<Scalar>& consts,
                              const Grid<Scalar>& grid, Scalar c, const MinimizeOptions& mopts = {},
                              const SpeedOptions& sopts = {}) {
  const GammaResult<Scalar> r = minimize_profile(spec, consts, c, initial_profile(spec, consts, grid), mopts);
  const Scalar tol = gamma_zero_tol(consts, c, sopts);
  if (std::abs(r.gamma) > tol) {
    throw Error(ErrorKind::not_a_wave, "gamma(" + std::to_string(double(c)) + ") = " + std::to_string(double(r.gamma)) +
                                           " exceeds " + std::to_string(double(tol)) +
                                           "; locate the speed with find_speed first");
  }
  return r.profile;
}

template <typename Scalar>
struct CurvePoint {
  Scalar c{};
  std::optional<GammaResult<Scalar>> result;
  std::string error;  ///< empty on success
  ErrorKind error_kind = ErrorKind::non_convergence;
};

/// gamma at each c of an increasing list. Warm starts chain the runs; without
/// them the points are independent and run on up to `jobs` threads.
template <typename Scalar>
std::vector<CurvePoint<Scalar>> gamma_curve(const PotentialSpec<Scalar>& spec, const PotentialConstants<Scalar>& consts,
                                            const Grid<Scalar>& grid, const std::vector<Scalar>& c_list,
                                            const MinimizeOptions& mopts = {}, bool warm_start = true, int jobs = 1) {
  if (c_list.empty()) throw Error(ErrorKind::contract_violation, "c_list is empty");
  for (std::size_t i = 0; i < c_list.size(); ++i) {
    if (!(c_list[i] > 0) || (i > 0 && !(c_list[i] > c_list[i - 1]))) {
      throw Error(ErrorKind::contract_violation, "c_list must be positive and strictly increasing");
    }
  }
  const Profile<Scalar> cold = initial_profile(spec, consts, grid);
  std::vector<CurvePoint<Scalar>> out(c_list.size());
  auto one = [&](std::size_t i, const Profile<Scalar>& start) {
    out[i].c = c_list[i];
    try {
      out[i].result = minimize_profile(spec, consts, c_list[i], start, mopts);
    } catch (const Error& e) {
      out[i].error = e.what();
      out[i].error_kind = e.kind();
    }
  };
  if (warm_start) {
    const Profile<Scalar>* start = &cold;
    for (std::size_t i = 0; i < c_list.size(); ++i) {
      one(i, *start);
      start = out[i].result ? &out[i].result->profile : &cold;
    }
    return out;
  }
  const std::size_t width = static_cast<std::size_t>(std::max(jobs, 1));
  for (std::size_t first = 0; first < c_list.size(); first += width) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = first; i < std::min(first + width, c_list.size()); ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] { one(i, cold); }));
    }
    for (auto& f : batch) f.get();
  }
  return out;
}

}  // namespace wave

#endif  // WAVE_SPEED_HPP
