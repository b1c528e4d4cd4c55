#ifndef WAVE_POTENTIAL_HPP
#define WAVE_POTENTIAL_HPP

#include "wave/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace wave {

/// Axis-aligned box assumed to contain the negative set {W < 0}.
template <typename Scalar>
struct Box {
  Point<Scalar> lo;
  Point<Scalar> hi;

  bool contains(const Point<Scalar>& p, Scalar inflate = Scalar(0)) const {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const Scalar pad = inflate * (hi[i] - lo[i]);
      if (p[i] < lo[i] - pad || p[i] > hi[i] + pad) return false;
    }
    return true;
  }
};

/// A potential W: R^n -> R with a reference well b where W(b) = 0,
/// DW(b) = 0 and D^2W(b) > 0.
template <typename Scalar>
struct PotentialSpec {
  using P = Point<Scalar>;
  using H = SmallMatrix<Scalar>;

  std::string name;
  int dim = 0;
  P well_b;
  std::function<Scalar(const P&)> eval_W;
  std::function<P(const P&)> eval_grad;
  /// Optional; `hessian()` falls back to centered differences of eval_grad.
  std::function<H(const P&)> eval_hess;
  Box<Scalar> bounding_box;
};

template <typename Scalar>
struct PotentialConstants {
  Scalar m{};       ///< -inf W
  Point<Scalar> point_a;  ///< global minimizer of W
  Scalar M{};       ///< max of W on the segment a -> b
  Scalar d{};       ///< dist(b, {W < 0})
  Scalar mu{};      ///< smallest eigenvalue of D^2W(b)
};

struct ProjectionOptions {
  double tol = 1e-10;
  double gradient_floor = 1e-8;
  int max_iter = 100;
};

namespace detail {

inline void check_dim(int expected, Eigen::Index got) {
  if (got != expected) {
    throw Error(ErrorKind::contract_violation,
                "point has dimension " + std::to_string(got) + ", potential expects " +
                    std::to_string(expected));
  }
}

/// Antiderivative of (s^2 - 1)(2s - c) normalised to vanish at s = 1,
/// s^4/2 - c s^3/3 - s^2 + c s + 1/2 - 2c/3, kept factored so it has no
/// cancellation near the double root s = 1.
template <typename Scalar>
Scalar quartic_W(Scalar s, Scalar c) {
  const Scalar e = s - 1;
  const Scalar p = s + 1;
  return e * e * (p * p / 2 - c * (s + 2) / 3);
}

template <typename Scalar>
Scalar quartic_f(Scalar s, Scalar c) {
  return (s * s - 1) * (2 * s - c);
}

template <typename Scalar>
Scalar quartic_df(Scalar s, Scalar c) {
  return 6 * s * s - 2 * c * s - 2;
}

}  // namespace detail

template <typename Scalar>
Scalar eval_potential(const PotentialSpec<Scalar>& spec, const Point<Scalar>& point) {
  detail::check_dim(spec.dim, point.size());
  return spec.eval_W(point);
}

template <typename Scalar>
Point<Scalar> eval_gradient(const PotentialSpec<Scalar>& spec, const Point<Scalar>& point) {
  detail::check_dim(spec.dim, point.size());
  return spec.eval_grad(point);
}

template <typename Scalar>
SmallMatrix<Scalar> hessian(const PotentialSpec<Scalar>& spec, const Point<Scalar>& point) {
  detail::check_dim(spec.dim, point.size());
  if (spec.eval_hess) return spec.eval_hess(point);
  const Scalar h = std::cbrt(std::numeric_limits<Scalar>::epsilon());
  SmallMatrix<Scalar> H(spec.dim, spec.dim);
  for (int j = 0; j < spec.dim; ++j) {
    Point<Scalar> plus = point, minus = point;
    plus[j] += h;
    minus[j] -= h;
    H.col(j) = (spec.eval_grad(plus) - spec.eval_grad(minus)) / (2 * h);
  }
  return (H + H.transpose()) / 2;
}

// ---------------------------------------------------------------------------
// Builtin potentials

template <typename Scalar>
Box<Scalar> default_box(int dim) {
  Box<Scalar> box;
  box.lo = Point<Scalar>::Constant(dim, Scalar(-2));
  box.hi = Point<Scalar>::Constant(dim, Scalar(2));
  return box;
}

/// W(u) = int_1^u (s^2-1)(2s-alpha) ds. Exact wave: tanh(x + x0) at speed alpha.
template <typename Scalar>
PotentialSpec<Scalar> scalar_cubic(Scalar alpha) {
  using P = Point<Scalar>;
  if (!(alpha > 0 && alpha < 2)) {
    throw Error(ErrorKind::contract_violation, "scalar_cubic requires 0 < alpha < 2");
  }
  PotentialSpec<Scalar> spec;
  spec.name = "scalar_cubic";
  spec.dim = 1;
  spec.well_b = P::Ones(1);
  spec.eval_W = [alpha](const P& u) { return detail::quartic_W(u[0], alpha); };
  spec.eval_grad = [alpha](const P& u) {
    P g(1);
    g[0] = detail::quartic_f(u[0], alpha);
    return g;
  };
  spec.eval_hess = [alpha](const P& u) {
    SmallMatrix<Scalar> h(1, 1);
    h(0, 0) = detail::quartic_df(u[0], alpha);
    return h;
  };
  spec.bounding_box = default_box<Scalar>(1);
  return spec;
}

/// W(u, v) = int_1^u f(s, alpha) ds + int_1^v f(s, beta) ds with
/// f(s, c) = (s^2-1)(2s-c) and 0 < alpha <= beta < 2.
template <typename Scalar>
PotentialSpec<Scalar> decoupled_quartic(Scalar alpha, Scalar beta) {
  using P = Point<Scalar>;
  if (!(alpha > 0 && alpha <= beta && beta < 2)) {
    throw Error(ErrorKind::contract_violation,
                "decoupled_quartic requires 0 < alpha <= beta < 2");
  }
  PotentialSpec<Scalar> spec;
  spec.name = "decoupled_quartic";
  spec.dim = 2;
  spec.well_b = P::Ones(2);
  spec.eval_W = [alpha, beta](const P& u) {
    return detail::quartic_W(u[0], alpha) + detail::quartic_W(u[1], beta);
  };
  spec.eval_grad = [alpha, beta](const P& u) {
    P g(2);
    g[0] = detail::quartic_f(u[0], alpha);
    g[1] = detail::quartic_f(u[1], beta);
    return g;
  };
  spec.eval_hess = [alpha, beta](const P& u) {
    SmallMatrix<Scalar> h = SmallMatrix<Scalar>::Zero(2, 2);
    h(0, 0) = detail::quartic_df(u[0], alpha);
    h(1, 1) = detail::quartic_df(u[1], beta);
    return h;
  };
  spec.bounding_box = default_box<Scalar>(2);
  return spec;
}

/// One monomial coeff * prod_i u_i^powers[i].
template <typename Scalar>
struct Monomial {
  Scalar coeff{};
  std::vector<int> powers;
};

/// Polynomial potential from a coefficient table. The caller supplies b and
/// the bounding box; assumption (A) is checked by compute_constants.
template <typename Scalar>
PotentialSpec<Scalar> user_polynomial(std::vector<Monomial<Scalar>> terms, Point<Scalar> well_b,
                                      Box<Scalar> box) {
  using P = Point<Scalar>;
  const int dim = static_cast<int>(well_b.size());
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorKind::contract_violation, "user_polynomial dimension out of range");
  }
  if (box.lo.size() != dim || box.hi.size() != dim) {
    throw Error(ErrorKind::contract_violation, "bounding box dimension mismatch");
  }
  for (const auto& t : terms) {
    if (static_cast<int>(t.powers.size()) != dim) {
      throw Error(ErrorKind::contract_violation, "monomial power list has wrong length");
    }
    for (int p : t.powers) {
      if (p < 0) throw Error(ErrorKind::contract_violation, "negative monomial power");
    }
  }

  auto ipow = [](Scalar x, int p) {
    Scalar r = 1;
    for (int k = 0; k < p; ++k) r *= x;
    return r;
  };

  PotentialSpec<Scalar> spec;
  spec.name = "user_polynomial";
  spec.dim = dim;
  spec.well_b = well_b;
  spec.bounding_box = box;
  spec.eval_W = [terms, ipow](const P& u) {
    Scalar w = 0;
    for (const auto& t : terms) {
      Scalar v = t.coeff;
      for (Eigen::Index i = 0; i < u.size(); ++i) v *= ipow(u[i], t.powers[i]);
      w += v;
    }
    return w;
  };
  spec.eval_grad = [terms, ipow, dim](const P& u) {
    P g = P::Zero(dim);
    for (const auto& t : terms) {
      for (int j = 0; j < dim; ++j) {
        if (t.powers[j] == 0) continue;
        Scalar v = t.coeff * t.powers[j] * ipow(u[j], t.powers[j] - 1);
        for (int i = 0; i < dim; ++i) {
          if (i != j) v *= ipow(u[i], t.powers[i]);
        }
        g[j] += v;
      }
    }
    return g;
  };
  spec.eval_hess = [terms, ipow, dim](const P& u) {
    SmallMatrix<Scalar> h = SmallMatrix<Scalar>::Zero(dim, dim);
    for (const auto& t : terms) {
      for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) {
          std::vector<int> pw = t.powers;
          Scalar v = t.coeff;
          if (pw[j] == 0) continue;
          v *= pw[j];
          pw[j] -= 1;
          if (pw[k] == 0) continue;
          v *= pw[k];
          pw[k] -= 1;
          for (int i = 0; i < dim; ++i) v *= ipow(u[i], pw[i]);
          h(j, k) += v;
        }
      }
    }
    return h;
  };
  return spec;
}

// ---------------------------------------------------------------------------
// Projection onto Gamma = boundary of {W < 0}

/// Damped Newton iteration along DW toward the zero level set of W.
template <typename Scalar>
Point<Scalar> project_to_gamma(const PotentialSpec<Scalar>& spec, const Point<Scalar>& point,
                               const ProjectionOptions& opts = {}) {
  detail::check_dim(spec.dim, point.size());
  Point<Scalar> q = point;
  Scalar w = spec.eval_W(q);
  auto polish = [&]() {
    // Extra undamped steps inside the tolerance bring W to roundoff, so the
    // result depends continuously on the input.
    for (int k = 0; k < 3 && w != Scalar(0); ++k) {
      const Point<Scalar> g = spec.eval_grad(q);
      const Scalar g2 = g.squaredNorm();
      if (g2 == Scalar(0)) break;
      const Point<Scalar> trial = q - (w / g2) * g;
      const Scalar wt = spec.eval_W(trial);
      if (!(std::abs(wt) < std::abs(w))) break;
      q = trial;
      w = wt;
    }
    return q;
  };
  for (int it = 0; it <= opts.max_iter; ++it) {
    if (std::abs(w) <= Scalar(opts.tol)) return polish();
    if (it == opts.max_iter) break;
    const Point<Scalar> g = spec.eval_grad(q);
    const Scalar g2 = g.squaredNorm();
    if (std::sqrt(g2) < Scalar(opts.gradient_floor)) {
      throw Error(ErrorKind::degenerate_projection,
                  "|DW| fell below the gradient floor while projecting onto Gamma");
    }
    const Point<Scalar> step = -(w / g2) * g;
    Scalar t = 1;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Point<Scalar> trial = q + t * step;
      const Scalar wt = spec.eval_W(trial);
      if (std::abs(wt) < std::abs(w)) {
        q = trial;
        w = wt;
        accepted = true;
        break;
      }
      t /= 2;
    }
    if (!accepted) break;
  }
  throw Error(ErrorKind::non_convergence, "projection onto Gamma did not converge");
}

// ---------------------------------------------------------------------------
// Analytic constants

struct ConstantsOptions {
  int grid_points = 401;          ///< per axis, capped by max_scan_points overall
  long max_scan_points = 2'000'000;
  int segment_points = 401;
  int starts = 8;
};

namespace detail {

/// Visits every point of a tensor grid over the box.
template <typename Scalar, typename F>
void scan_box(const Box<Scalar>& box, int per_axis, F&& visit) {
  const int dim = static_cast<int>(box.lo.size());
  std::vector<int> idx(dim, 0);
  Point<Scalar> p(dim);
  while (true) {
    for (int i = 0; i < dim; ++i) {
      p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * Scalar(idx[i]) / Scalar(per_axis - 1);
    }
    visit(p);
    int k = 0;
    while (k < dim && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == dim) break;
  }
}

/// Box-clamped Newton descent with a gradient fallback; returns a local minimizer.
template <typename Scalar>
Point<Scalar> local_descent(const PotentialSpec<Scalar>& spec, Point<Scalar> x) {
  Scalar fx = spec.eval_W(x);
  for (int it = 0; it < 200; ++it) {
    const Point<Scalar> g = spec.eval_grad(x);
    if (g.norm() < Scalar(1e-14)) break;
    const SmallMatrix<Scalar> H = hessian(spec, x);
    Point<Scalar> dir;
    Eigen::LLT<SmallMatrix<Scalar>> llt(H);
    if (llt.info() == Eigen::Success) {
      dir = -llt.solve(g);
    } else {
      dir = -g;
    }
    if (dir.dot(g) >= 0) dir = -g;
    Scalar t = 1;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Point<Scalar> trial = x + t * dir;
      for (int i = 0; i < spec.dim; ++i) {
        trial[i] = std::clamp(trial[i], spec.bounding_box.lo[i], spec.bounding_box.hi[i]);
      }
      const Scalar ft = spec.eval_W(trial);
      if (ft < fx) {
        moved = (trial - x).norm() > Scalar(1e-16);
        x = trial;
        fx = ft;
        break;
      }
      t /= 2;
    }
    if (!moved) break;
  }
  return x;
}

template <typename Scalar, typename F>
Scalar golden_max(F&& f, Scalar lo, Scalar hi, int iters = 100) {
  const Scalar r = (std::sqrt(Scalar(5)) - 1) / 2;
  Scalar a = lo, b = hi;
  Scalar x1 = b - r * (b - a), x2 = a + r * (b - a);
  Scalar f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + r * (b - a); f2 = f(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - r * (b - a); f1 = f(x1);
    }
  }
  return std::max(f1, f2);
}

}  // namespace detail

/// Grid scan over the bounding box refined by local descent (m, a), a
/// segment scan (M), and a nearest-negative-point search refined on Gamma (d).
template <typename Scalar>
PotentialConstants<Scalar> compute_constants(const PotentialSpec<Scalar>& spec,
                                             const ConstantsOptions& opts = {}) {
  using P = Point<Scalar>;
  const int dim = spec.dim;
  const P& b = spec.well_b;

  int per_axis = std::max(opts.grid_points, 3);
  while (dim > 1 && std::pow(double(per_axis), dim) > double(opts.max_scan_points)) {
    per_axis = (per_axis - 1) / 2 + 1;
  }

  struct Sample {
    Scalar w;
    P p;
  };
  std::vector<Sample> lowest;
  Scalar nearest_neg = std::numeric_limits<Scalar>::infinity();
  P nearest_neg_point;
  bool any_negative = false;
  detail::scan_box(spec.bounding_box, per_axis, [&](const P& p) {
    const Scalar w = spec.eval_W(p);
    if (w < 0) {
      any_negative = true;
      const Scalar dist = (p - b).norm();
      if (dist < nearest_neg) {
        nearest_neg = dist;
        nearest_neg_point = p;
      }
      if (static_cast<int>(lowest.size()) < opts.starts || w < lowest.back().w) {
        if (static_cast<int>(lowest.size()) == opts.starts) lowest.pop_back();
        lowest.push_back({w, p});
        std::sort(lowest.begin(), lowest.end(),
                  [](const Sample& x, const Sample& y) { return x.w < y.w; });
      }
    }
  });
  if (!any_negative) {
    throw Error(ErrorKind::assumption_violation, "no point with W < 0 found in the bounding box");
  }

  PotentialConstants<Scalar> out;
  out.m = -std::numeric_limits<Scalar>::infinity();
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (const auto& s : lowest) {
    const P x = detail::local_descent(spec, s.p);
    const Scalar w = spec.eval_W(x);
    if (w < best) {
      best = w;
      out.point_a = x;
    }
  }
  out.m = -best;

  const P& a = out.point_a;
  auto on_segment = [&](Scalar theta) { return spec.eval_W(P(a + theta * (b - a))); };
  const int seg = std::max(opts.segment_points, 3);
  Scalar M = -std::numeric_limits<Scalar>::infinity();
  int arg = 0;
  for (int i = 0; i < seg; ++i) {
    const Scalar w = on_segment(Scalar(i) / Scalar(seg - 1));
    if (w > M) {
      M = w;
      arg = i;
    }
  }
  {
    const Scalar lo = Scalar(std::max(arg - 1, 0)) / Scalar(seg - 1);
    const Scalar hi = Scalar(std::min(arg + 1, seg - 1)) / Scalar(seg - 1);
    M = std::max(M, detail::golden_max(on_segment, lo, hi));
  }
  out.M = M;

  // First crossing on the ray from b toward the nearest negative sample,
  // then descend |q - b| along Gamma.
  P q;
  {
    Scalar lo = 0, hi = 1;  // W(b + lo*(p-b)) >= 0, W(b + hi*(p-b)) < 0
    const P dir = nearest_neg_point - b;
    // skip the positive neighbourhood of b; the first negative sample on the ray bounds hi
    for (int i = 1; i <= 64; ++i) {
      const Scalar t = Scalar(i) / 64;
      if (spec.eval_W(P(b + t * dir)) < 0) {
        hi = t;
        lo = Scalar(i - 1) / 64;
        break;
      }
    }
    for (int i = 0; i < 200; ++i) {
      const Scalar mid = (lo + hi) / 2;
      if (spec.eval_W(P(b + mid * dir)) < 0) hi = mid; else lo = mid;
    }
    q = b + hi * dir;
  }
  {
    ProjectionOptions popts;
    popts.tol = 1e-13;
    q = project_to_gamma(spec, q, popts);
    Scalar step = Scalar(0.5);
    for (int it = 0; it < 500 && step > Scalar(1e-14); ++it) {
      const P g = spec.eval_grad(q);
      const P n = g / g.norm();
      const P r = q - b;
      const P tangential = r - r.dot(n) * n;
      if (tangential.norm() < Scalar(1e-14)) break;
      P trial;
      try {
        trial = project_to_gamma(spec, P(q - step * tangential), popts);
      } catch (const Error&) {
        step /= 2;
        continue;
      }
      if ((trial - b).norm() < (q - b).norm()) {
        q = trial;
      } else {
        step /= 2;
      }
    }
  }
  out.d = std::min((q - b).norm(), nearest_neg);

  Eigen::SelfAdjointEigenSolver<SmallMatrix<Scalar>> eig(hessian(spec, b), Eigen::EigenvaluesOnly);
  out.mu = eig.eigenvalues().minCoeff();
  if (!(out.mu > 0)) {
    throw Error(ErrorKind::assumption_violation, "Hessian of W at b is not positive definite");
  }
  if (!(out.m > 0)) {
    throw Error(ErrorKind::assumption_violation, "inf W is not negative");
  }
  return out;
}

/// Smallest eigenpair of D^2W(b); the eigenvector spans the slowest decay direction.
template <typename Scalar>
std::pair<Scalar, Point<Scalar>> slowest_mode(const PotentialSpec<Scalar>& spec) {
  Eigen::SelfAdjointEigenSolver<SmallMatrix<Scalar>> eig(hessian(spec, spec.well_b));
  return {eig.eigenvalues()[0], eig.eigenvectors().col(0)};
}

}  // namespace wave

#endif  // WAVE_POTENTIAL_HPP
