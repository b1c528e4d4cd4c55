#ifndef WAVE_MINIMIZE_HPP
#define WAVE_MINIMIZE_HPP

#include "wave/functional.hpp"
#include "wave/potential.hpp"
#include "wave/profile.hpp"
#include "wave/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace wave {

struct MinimizeOptions {
  double opt_tol = 1e-8;     ///< stop when the preconditioned gradient norm falls below this
  long max_iters = 200000;
  double armijo_c1 = 1e-4;
  double shrink = 0.5;
  int restarts = 3;          ///< randomized perturbations of the start, on top of the plain run
  double perturbation = 0.05;
  unsigned seed = 0;
  double feas_tol = 1e-8;
  double penalty_kappa = 1e3;
  ProjectionOptions projection{};
  /// Called every `trace_every` iterations with (iteration, objective, gradient norm).
  std::function<void(long, double, double)> trace;
  long trace_every = 1000;
};

template <typename Scalar>
struct GammaResult {
  Scalar c{};
  Scalar gamma{};  ///< eval_J at the minimizer, penalty excluded
  Profile<Scalar> profile;
  Scalar grad_norm{};
  Scalar feasibility_violation{};
  long iterations = 0;
  bool converged = false;
  bool noise_limited = false;  ///< stopped at the roundoff floor of the objective above opt_tol
  bool penalty_active = false;
  /// max - min of gamma over multi-start runs; flagged when above 1e-4
  Scalar multistart_spread{};
  BoundsReport<Scalar> bounds;
};

/// max over x > 0 of max(0, -W(u(x))).
template <typename Scalar>
Scalar feasibility_violation(const PotentialSpec<Scalar>& spec, const Profile<Scalar>& p) {
  Scalar v = 0;
  for (Eigen::Index i = p.grid.zero_index() + 1; i < p.size(); ++i) {
    v = std::max(v, -spec.eval_W(p.at(i)));
  }
  return v;
}

namespace detail {

/// Orthogonal matrix whose last column is the unit vector `n`.
template <typename Scalar>
SmallMatrix<Scalar> frame_with_normal(const Point<Scalar>& n) {
  const Eigen::Index dim = n.size();
  SmallMatrix<Scalar> R = SmallMatrix<Scalar>::Identity(dim, dim);
  Point<Scalar> v = n;
  v[dim - 1] -= 1;
  const Scalar vv = v.squaredNorm();
  if (vv > Scalar(1e-30)) R -= (2 / vv) * v * v.transpose();
  return R;
}

/// Inverse of a small symmetric positive definite block.
template <typename Scalar>
SmallMatrix<Scalar> small_inverse(const SmallMatrix<Scalar>& S) {
  const Eigen::Index n = S.rows();
  SmallMatrix<Scalar> out(n, n);
  if (n == 1) {
    out(0, 0) = 1 / S(0, 0);
  } else if (n == 2) {
    const Scalar det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    out << S(1, 1) / det, -S(0, 1) / det, -S(1, 0) / det, S(0, 0) / det;
  } else {
    out = S.llt().solve(SmallMatrix<Scalar>::Identity(n, n));
  }
  return out;
}

/// Weighted H^1 metric: per component, the weighted stiffness plus a per-node
/// shift times the lumped weighted mass, with the last node pinned to b. Descent
/// directions are the metric gradient restricted to the tangent space of the
/// active constraints (node 0 on Gamma, active nodes of W >= 0 on x > 0),
/// computed by a block-tridiagonal solve.
template <typename Scalar>
class SobolevMetric {
 public:
  using Block = SmallMatrix<Scalar>;

  SobolevMetric(const Grid<Scalar>& grid, const Vector<Scalar>& omega, int dim)
      : n_(grid.size() - 1), dim_(dim) {
    mass_ = node_weights(omega).head(n_);
    stiff_.resize(omega.size());
    for (Eigen::Index k = 0; k < omega.size(); ++k) {
      const Scalar h = grid.spacing(k);
      stiff_[k] = omega[k] / (h * h);
    }
  }

  Eigen::Index unknowns() const { return n_; }

  /// `normals[i]` is empty for a free node, otherwise the constraint normal;
  /// `shift(j, i)` multiplies the mass of component j at node i.
  NodeMatrix<Scalar> direction(const NodeMatrix<Scalar>& grad,
                               const std::vector<std::optional<Point<Scalar>>>& normals,
                               const NodeMatrix<Scalar>& shift) const {
    const int dim = dim_;
    frames_.resize(dim, dim * n_);
    fixed_.assign(n_, false);
    auto& fixed = fixed_;
    auto frame = [&](Eigen::Index i) { return Block(frames_.block(0, dim * i, dim, dim)); };
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (normals[i]) {
        frames_.block(0, dim * i, dim, dim) = frame_with_normal<Scalar>(normals[i]->normalized());
        fixed[i] = true;
      }
    }
    auto diag_block = [&](Eigen::Index i) {
      Block D = Block::Zero(dim, dim);
      const Scalar k = (i > 0 ? stiff_[i - 1] : Scalar(0)) + stiff_[i];
      for (int j = 0; j < dim; ++j) D(j, j) = k + shift(j, i) * mass_[i];
      if (fixed[i]) {
        const Block R = frame(i);
        D = R.transpose().lazyProduct(D.lazyProduct(R));
        D.row(dim - 1).setZero();
        D.col(dim - 1).setZero();
        D(dim - 1, dim - 1) = 1;
      }
      return D;
    };
    // Coupling block between nodes i and i+1 (in the rotated coordinates).
    auto upper_block = [&](Eigen::Index i) {
      Block U = Block::Identity(dim, dim) * -stiff_[i];
      if (fixed[i]) U = Block(frame(i).transpose().lazyProduct(U));
      if (fixed[i + 1]) U = Block(U.lazyProduct(frame(i + 1)));
      if (fixed[i]) U.row(dim - 1).setZero();
      if (fixed[i + 1]) U.col(dim - 1).setZero();
      return U;
    };

    inv_.resize(dim, dim * n_);
    upper_.resize(dim, dim * n_);
    auto inv = [&](Eigen::Index i) { return inv_.block(0, dim * i, dim, dim); };
    auto upper = [&](Eigen::Index i) { return upper_.block(0, dim * i, dim, dim); };
    NodeMatrix<Scalar> rhs(dim, n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      Point<Scalar> r = -grad.col(i);
      if (fixed[i]) {
        r = frame(i).transpose().lazyProduct(r);
        r[dim - 1] = 0;
      }
      rhs.col(i) = r;
    }
    for (Eigen::Index i = 0; i < n_; ++i) {
      Block S = diag_block(i);
      if (i > 0) {
        const Block Up = upper(i - 1);
        const Block Ip = inv(i - 1);
        const Block IU = Ip.lazyProduct(Up);
        S -= Up.transpose().lazyProduct(IU);
        const Point<Scalar> y = Ip.lazyProduct(rhs.col(i - 1));
        rhs.col(i) -= Up.transpose().lazyProduct(y);
      }
      inv(i) = small_inverse(S);
      if (i + 1 < n_) upper(i) = upper_block(i);
    }
    NodeMatrix<Scalar> d = NodeMatrix<Scalar>::Zero(dim, n_ + 1);
    for (Eigen::Index i = n_ - 1; i >= 0; --i) {
      Point<Scalar> r = rhs.col(i);
      if (i + 1 < n_) r -= Block(upper(i)).lazyProduct(Point<Scalar>(d.col(i + 1)));
      d.col(i) = Block(inv(i)).lazyProduct(r);
    }
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (fixed[i]) {
        d(dim - 1, i) = 0;
        d.col(i) = frame(i).lazyProduct(Point<Scalar>(d.col(i)));
      }
    }
    return d;
  }

 private:
  Eigen::Index n_;
  int dim_;
  Vector<Scalar> mass_;
  Vector<Scalar> stiff_;
  mutable NodeMatrix<Scalar> inv_;
  mutable NodeMatrix<Scalar> upper_;
  mutable NodeMatrix<Scalar> frames_;
  mutable std::vector<bool> fixed_;
};

template <typename Scalar>
Point<Scalar> metric_floor(const PotentialSpec<Scalar>& spec) {
  const SmallMatrix<Scalar> H = hessian(spec, spec.well_b);
  Point<Scalar> s(spec.dim);
  for (int j = 0; j < spec.dim; ++j) s[j] = std::max(H(j, j), Scalar(0.25));
  return s;
}

/// Mass shift per node and component. Where the node weight is resolvable
/// in J the shift is the diagonal of D^2W(b); where it is not (far left), the
/// line search cannot see the node, so the shift also dominates the local
/// curvature of W to keep the step stable there.
template <typename Scalar>
void metric_shift(const PotentialSpec<Scalar>& spec, const Profile<Scalar>& p, const Point<Scalar>& floor,
                  const Vector<Scalar>& mass, NodeMatrix<Scalar>& shift) {
  const Scalar visible = Scalar(1e-12) * mass.maxCoeff();
  shift = floor.replicate(1, p.size() - 1);
  for (Eigen::Index i = 0; i + 1 < p.size() && mass[i] < visible; ++i) {
    const SmallMatrix<Scalar> H = hessian(spec, p.at(i));
    for (int j = 0; j < p.dim(); ++j) shift(j, i) = std::max(floor[j], H(j, j));
  }
}

struct RunOutcome {
  long iterations = 0;
  bool converged = false;
  bool noise_limited = false;
};

/// J + penalty together with the sum of absolute cell contributions, which
/// sets the resolution at which differences of the objective are meaningful.
template <typename Scalar>
std::pair<Scalar, Scalar> objective_and_scale(const PotentialSpec<Scalar>& spec, const FunctionalParams<Scalar>& params,
                                              const Vector<Scalar>& omega, const Profile<Scalar>& p) {
  const Eigen::Index z = p.grid.zero_index();
  Scalar total = 0, scale = 0;
  auto pen = [&](Scalar w) {
    const Scalar v = std::max(Scalar(0), -w);
    return params.penalty_kappa * v * v;
  };
  Scalar w_prev = spec.eval_W(p.at(0));
  for (Eigen::Index k = 0; k + 1 < p.size(); ++k) {
    const Scalar h = p.grid.spacing(k);
    const Scalar w_next = spec.eval_W(p.at(k + 1));
    const Scalar kinetic = (p.values.col(k + 1) - p.values.col(k)).squaredNorm() / (2 * h * h);
    Scalar term = omega[k] * (kinetic + (w_prev + w_next) / 2);
    if (k >= z) term += omega[k] * (pen(w_prev) + pen(w_next)) / 2;
    total += term;
    scale += omega[k] * (kinetic + (std::abs(w_prev) + std::abs(w_next)) / 2);
    w_prev = w_next;
  }
  return {total, scale};
}

/// Clamps to the inflated bounding box, puts node 0 on Gamma and projects
/// nodes with W < 0 on x > 0 back onto Gamma. False if a projection fails.
template <typename Scalar>
bool restore_admissible(const PotentialSpec<Scalar>& spec, Profile<Scalar>& p, const ProjectionOptions& popts) {
  const Box<Scalar>& box = spec.bounding_box;
  const Eigen::Index z = p.grid.zero_index();
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    for (int j = 0; j < p.dim(); ++j) {
      const Scalar pad = Scalar(0.1) * (box.hi[j] - box.lo[j]);
      p.values(j, i) = std::clamp(p.values(j, i), box.lo[j] - pad, box.hi[j] + pad);
    }
  }
  try {
    p.values.col(z) = project_to_gamma(spec, p.at(z), popts);
    for (Eigen::Index i = z + 1; i + 1 < p.size(); ++i) {
      if (spec.eval_W(p.at(i)) < 0) p.values.col(i) = project_to_gamma(spec, p.at(i), popts);
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

template <typename Scalar>
RunOutcome descend(const PotentialSpec<Scalar>& spec, const FunctionalParams<Scalar>& params,
                   Profile<Scalar>& u, const MinimizeOptions& opts, Scalar& grad_norm) {
  const Vector<Scalar> omega = cell_weights(u.grid, params);
  const SobolevMetric<Scalar> metric(u.grid, omega, spec.dim);
  const Point<Scalar> floor = metric_floor(spec);
  const Vector<Scalar> mass = node_weights(omega);
  NodeMatrix<Scalar> shift;
  const Eigen::Index z = u.grid.zero_index();
  constexpr Scalar kNoise = 64 * std::numeric_limits<Scalar>::epsilon();

  RunOutcome out;
  if (!restore_admissible(spec, u, opts.projection)) {
    throw Error(ErrorKind::degenerate_projection, "starting profile cannot be made admissible");
  }
  auto [f, scale] = objective_and_scale(spec, params, omega, u);
  NodeMatrix<Scalar> g = grad_J(spec, params, u);
  Scalar step = 1;
  const Scalar act_tol = Scalar(10 * opts.projection.tol);
  std::vector<std::optional<Point<Scalar>>> normals(metric.unknowns());
  constexpr long kStallWindow = 50;
  Scalar best_gn = std::numeric_limits<Scalar>::infinity();
  long best_it = 0;
  for (long it = 0; it < opts.max_iters; ++it) {
    for (Eigen::Index i = 0; i < metric.unknowns(); ++i) {
      normals[i].reset();
      if (i < z) continue;
      const Point<Scalar> ui = u.at(i);
      const Point<Scalar> n = spec.eval_grad(ui);
      // Node 0 always; on x > 0 a node on Gamma whose descent pushes into {W < 0}.
      // Distance to Gamma is W / |DW|; near b both vanish and the node is free.
      const Scalar dn = n.norm();
      if (i == z || (dn > Scalar(1e-4) && spec.eval_W(ui) <= act_tol * dn && g.col(i).dot(n) > 0)) normals[i] = n;
    }
    metric_shift(spec, u, floor, mass, shift);
    const NodeMatrix<Scalar> d = metric.direction(g, normals, shift);
    const Scalar slope = (g.array() * d.array()).sum();
    grad_norm = std::sqrt(std::max(-slope, Scalar(0)));
    out.iterations = it;
    if (opts.trace && it % opts.trace_every == 0) opts.trace(it, double(f), double(grad_norm));
    if (grad_norm <= Scalar(opts.opt_tol)) {
      out.converged = true;
      return out;
    }
    // Below the resolution of f the gradient norm only wanders; stop once it
    // has not improved for a while.
    if (grad_norm < best_gn) {
      best_gn = grad_norm;
      best_it = it;
    } else if (grad_norm * grad_norm <= kNoise * scale && it - best_it >= kStallWindow) {
      out.converged = true;
      out.noise_limited = true;
      return out;
    }
    Scalar t = std::min(step * 2, Scalar(4));
    bool accepted = false;
    while (t > Scalar(1e-14)) {
      Profile<Scalar> trial = u;
      trial.values += t * d;
      if (!restore_admissible(spec, trial, opts.projection)) {
        t *= Scalar(opts.shrink);
        continue;
      }
      const auto [ft, st] = objective_and_scale(spec, params, omega, trial);
      bool ok = ft <= f + Scalar(opts.armijo_c1) * t * slope;
      NodeMatrix<Scalar> gt;
      if (!ok && std::abs(ft - f) <= kNoise * (scale + st)) {
        // Approximate Wolfe test: f cannot resolve the decrease, but the
        // directional derivative can.
        gt = grad_J(spec, params, trial);
        const Scalar slope_t = (gt.array() * d.array()).sum();
        ok = slope_t <= Scalar(0.8) * -slope;
      }
      if (ok) {
        g = gt.size() ? std::move(gt) : grad_J(spec, params, trial);
        u = std::move(trial);
        f = ft;
        scale = st;
        step = t;
        accepted = true;
        break;
      }
      t *= Scalar(opts.shrink);
    }
    if (!accepted) {
      out.iterations = it;
      return out;
    }
  }
  out.iterations = opts.max_iters;
  return out;
}

}  // namespace detail

/// Projected-gradient minimization of J(c, .) + penalty over profiles with
/// u(0) on Gamma, followed by multi-start restarts. Returns the best run.
template <typename Scalar>
GammaResult<Scalar> minimize_profile(const PotentialSpec<Scalar>& spec, const PotentialConstants<Scalar>& consts,
                                     Scalar c, const Profile<Scalar>& init, const MinimizeOptions& opts = {}) {
  if (!(opts.opt_tol > 0) || opts.max_iters <= 0 || !(opts.armijo_c1 > 0 && opts.armijo_c1 < 1) ||
      !(opts.shrink > 0 && opts.shrink < 1) || opts.restarts < 0) {
    throw Error(ErrorKind::contract_violation,
                "need opt_tol > 0, max_iters > 0, 0 < armijo_c1 < 1, 0 < shrink < 1, restarts >= 0");
  }
  if (!(c > 0)) throw Error(ErrorKind::contract_violation, "wave speed c must be positive");
  FunctionalParams<Scalar> params;
  params.c = c;
  params.penalty_kappa = Scalar(opts.penalty_kappa);

  auto run = [&](Profile<Scalar> start) {
    Profile<Scalar> u = translate_to_gamma(spec, start, opts.projection);
    Scalar gnorm = 0;
    detail::RunOutcome o = detail::descend(spec, params, u, opts, gnorm);
    GammaResult<Scalar> r;
    r.c = c;
    r.gamma = eval_J(spec, params, u);
    r.grad_norm = gnorm;
    r.iterations = o.iterations;
    r.converged = o.converged;
    r.noise_limited = o.noise_limited;
    r.feasibility_violation = feasibility_violation(spec, u);
    r.penalty_active = r.feasibility_violation > Scalar(opts.projection.tol);
    r.profile = std::move(u);
    return r;
  };

  GammaResult<Scalar> best = run(init);
  Scalar lo = best.gamma, hi = best.gamma;
  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int r = 0; r < opts.restarts; ++r) {
    Profile<Scalar> start = best.profile;
    const Eigen::Index z = start.grid.zero_index();
    // Smooth bump perturbation on the left half-line, which keeps the start admissible.
    const Scalar width = 1 + Scalar(2) * std::abs(Scalar(noise(rng)));
    const Scalar center = -width * (1 + std::abs(Scalar(noise(rng))));
    Point<Scalar> dir(spec.dim);
    for (int j = 0; j < spec.dim; ++j) dir[j] = Scalar(noise(rng));
    dir *= Scalar(opts.perturbation) / std::max(dir.norm(), Scalar(1e-12));
    for (Eigen::Index i = 0; i < z; ++i) {
      const Scalar s = (start.grid[i] - center) / width;
      start.values.col(i) += std::exp(-s * s) * dir;
    }
    GammaResult<Scalar> cand;
    try {
      cand = run(start);
    } catch (const Error&) {
      continue;
    }
    lo = std::min(lo, cand.gamma);
    hi = std::max(hi, cand.gamma);
    if (cand.gamma < best.gamma) best = std::move(cand);
  }
  best.multistart_spread = hi - lo;
  best.bounds = compute_bounds(spec, consts, c);
  if (best.feasibility_violation > Scalar(opts.feas_tol)) {
    throw Error(ErrorKind::infeasible_minimizer,
                "W(u) < 0 on x > 0 at the minimizer (violation " + std::to_string(double(best.feasibility_violation)) + ")");
  }
  return best;
}

}  // namespace wave

#endif  // WAVE_MINIMIZE_HPP
