#ifndef WAVE_VERIFY_HPP
#define WAVE_VERIFY_HPP

#include "wave/functional.hpp"
#include "wave/potential.hpp"
#include "wave/profile.hpp"
#include "wave/speed.hpp"
#include "wave/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wave {

/// Nodes with e^{c x} below this are outside what J resolves; residual checks skip them.
inline constexpr double kResolvedWeight = 1e-12;

struct VerifyThresholds {
  double el = 1e-2;
  double first_integral = 2e-2;
  double halfline = 5e-3;
  double jump = 1e-2;
  double decay_slack = 0.05;
  double left_tail = 1e-2;
  double shooting = 2e-2;
};

struct Check {
  double value = 0;
  double threshold = 0;
  bool pass = false;
  bool evaluated = false;
  std::string note;
};

template <typename Scalar>
struct VerifyReport {
  Scalar c{};
  Scalar gamma_hat{};
  Check el_residual;
  Check first_integral_left, first_integral_right;
  Check halfline_right, halfline_left, a15;  ///< right/left weighted identities and the energy balance
  Check jump_gap;
  Check jump_sign;
  Check decay;                               ///< lambda_fit > c - slack
  Scalar decay_lambda_fit{}, decay_lambda_theory{};
  Check left_tail_grad;
  Check left_tail_min;                       ///< min of W on x <= 0 sits in the left 20% near the end value
  Scalar left_tail_W_limit{};
  Scalar dist_to_equilibria = std::numeric_limits<Scalar>::infinity();
  std::optional<Point<Scalar>> nearest_equilibrium;
  Check shooting;
  bool pass = false;

  std::vector<std::pair<std::string, const Check*>> checks() const {
    return {{"el_residual", &el_residual},
            {"first_integral_left", &first_integral_left},
            {"first_integral_right", &first_integral_right},
            {"halfline_right", &halfline_right},
            {"halfline_left", &halfline_left},
            {"energy_balance_right", &a15},
            {"jump_gap", &jump_gap},
            {"jump_sign", &jump_sign},
            {"decay_rate", &decay},
            {"left_tail_grad", &left_tail_grad},
            {"left_tail_min", &left_tail_min},
            {"shooting_gap", &shooting}};
  }
};

namespace detail {

inline Check make_check(double value, double threshold) {
  Check c;
  c.value = value;
  c.threshold = threshold;
  c.pass = value <= threshold;
  c.evaluated = true;
  return c;
}

/// Second-order derivative of columns [first, last] of `v` using only those nodes.
template <typename Scalar, typename Derived>
NodeMatrix<Scalar> range_derivative(const Vector<Scalar>& x, const Eigen::MatrixBase<Derived>& v,
                                    Eigen::Index first, Eigen::Index last) {
  const Eigen::Index n = last - first + 1;
  NodeMatrix<Scalar> d = NodeMatrix<Scalar>::Zero(v.rows(), v.cols());
  if (n < 3) return d;
  for (Eigen::Index i = first; i <= last; ++i) {
    Eigen::Index a, b;
    if (i == first) {
      a = i + 1;
      b = i + 2;
    } else if (i == last) {
      a = i - 1;
      b = i - 2;
    } else {
      a = i - 1;
      b = i + 1;
    }
    const auto w = derivative_weights(x[i], x[a], x[b]);
    d.col(i) = w[0] * v.col(i) + w[1] * v.col(a) + w[2] * v.col(b);
  }
  return d;
}

template <typename Scalar>
Eigen::Index first_resolved(const Profile<Scalar>& p, Scalar c) {
  const Scalar x_min = std::log(Scalar(kResolvedWeight)) / c;
  Eigen::Index i = 0;
  while (i < p.grid.zero_index() && p.grid[i] < x_min) ++i;
  return i;
}

}  // namespace detail

/// max |c u' + u'' - DW(u)| over resolved interior nodes; on x > 0 only off
/// Gamma. With gamma_hat != 0 the nodes next to 0 are skipped.
template <typename Scalar>
Scalar el_residual(const PotentialSpec<Scalar>& spec, Scalar c, const Profile<Scalar>& p, Scalar gamma_hat = 0,
                   Scalar proj_tol = Scalar(1e-10)) {
  if (p.size() < 5) throw Error(ErrorKind::contract_violation, "el_residual needs at least 5 nodes");
  const auto& x = p.grid.nodes();
  const Eigen::Index z = p.grid.zero_index();
  Scalar worst = 0;
  for (Eigen::Index i = std::max<Eigen::Index>(1, detail::first_resolved(p, c)); i + 1 < p.size(); ++i) {
    if (gamma_hat != Scalar(0) && std::abs(i - z) <= 1) continue;
    const Point<Scalar> u = p.at(i);
    if (i > z && std::abs(spec.eval_W(u)) <= proj_tol) continue;
    const Scalar hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
    const auto w1 = derivative_weights(x[i], x[i - 1], x[i + 1]);
    const Point<Scalar> d1 = w1[0] * u + w1[1] * p.values.col(i - 1) + w1[2] * p.values.col(i + 1);
    const Point<Scalar> d2 =
        2 * (hl * p.values.col(i + 1) - (hl + hr) * u + hr * p.values.col(i - 1)) / (hl * hr * (hl + hr));
    worst = std::max(worst, (c * d1 + d2 - spec.eval_grad(u)).template lpNorm<Eigen::Infinity>());
  }
  return worst;
}

/// max |(|u'|^2/2 - W(u))' + c |u'|^2| on each half-line: (left, right).
template <typename Scalar>
std::pair<Scalar, Scalar> first_integral_residual(const PotentialSpec<Scalar>& spec, Scalar c,
                                                  const Profile<Scalar>& p) {
  const auto& x = p.grid.nodes();
  const Eigen::Index z = p.grid.zero_index();
  auto side = [&](Eigen::Index first, Eigen::Index last) {
    if (last - first < 6) return Scalar(0);
    const NodeMatrix<Scalar> du = detail::range_derivative(x, p.values, first, last);
    NodeMatrix<Scalar> xi = NodeMatrix<Scalar>::Zero(1, p.size());
    for (Eigen::Index i = first; i <= last; ++i) xi(0, i) = du.col(i).squaredNorm() / 2 - spec.eval_W(p.at(i));
    const NodeMatrix<Scalar> dxi = detail::range_derivative(x, xi, first, last);
    // Two nodes in from each end every xi value entering xi' comes from centered stencils.
    Scalar worst = 0;
    for (Eigen::Index i = first + 2; i <= last - 2; ++i) {
      worst = std::max(worst, std::abs(dxi(0, i) + c * du.col(i).squaredNorm()));
    }
    return worst;
  };
  return {side(detail::first_resolved(p, c), z), side(z, p.size() - 1)};
}

/// Residuals of the weighted half-line identities and the right energy balance:
/// |int_0^inf e^{cx}(|u'|^2/2 + W) - |u'(0+)|^2/(2c)|,
/// |int_-inf^0 e^{cx}(|u'|^2/2 + W) + |u'(0-)|^2/(2c)|,
/// ||u'(0+)|^2/2 - c int_0^inf |u'|^2|.
template <typename Scalar>
std::array<Scalar, 3> halfline_identities(const PotentialSpec<Scalar>& spec, Scalar c, const Profile<Scalar>& p) {
  FunctionalParams<Scalar> params;
  params.c = c;
  const Vector<Scalar> omega = cell_weights(p.grid, params);
  const Eigen::Index z = p.grid.zero_index();
  Scalar left = 0, right = 0, kinetic_right = 0;
  for (Eigen::Index k = 0; k + 1 < p.size(); ++k) {
    const Scalar h = p.grid.spacing(k);
    const Scalar slope2 = (p.values.col(k + 1) - p.values.col(k)).squaredNorm() / (h * h);
    const Scalar cell = omega[k] * (slope2 / 2 + (spec.eval_W(p.at(k)) + spec.eval_W(p.at(k + 1))) / 2);
    if (k < z) {
      left += cell;
    } else {
      right += cell;
      kinetic_right += slope2 * h;
    }
  }
  const auto [dl, dr] = derivative_jump_at_zero(p);
  return {std::abs(right - dr.squaredNorm() / (2 * c)), std::abs(left + dl.squaredNorm() / (2 * c)),
          std::abs(dr.squaredNorm() / 2 - c * kinetic_right)};
}

/// |(|u'(0+)|^2 - |u'(0-)|^2)/(2c) - gamma_hat|.
template <typename Scalar>
Scalar jump_identity_gap(Scalar c, Scalar gamma_hat, const Profile<Scalar>& p) {
  const auto [dl, dr] = derivative_jump_at_zero(p);
  return std::abs((dr.squaredNorm() - dl.squaredNorm()) / (2 * c) - gamma_hat);
}

/// (lambda_fit, lambda_theory): least-squares decay rate of |u - b| over the
/// right-tail window (1e-12, 1e-2), and the largest admissible rate Lambda.
template <typename Scalar>
std::pair<Scalar, Scalar> fit_decay_rate(const PotentialConstants<Scalar>& consts, Scalar c, const Profile<Scalar>& p) {
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (Eigen::Index i = p.grid.zero_index() + 1; i < p.size(); ++i) {
    const Scalar r = (p.at(i) - p.well_b).norm();
    if (!(r > Scalar(1e-12) && r < Scalar(1e-2))) continue;
    const Scalar xi = p.grid[i], yi = std::log(r);
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
    ++n;
  }
  if (n < 20) {
    throw Error(ErrorKind::tail_error, "right tail has " + std::to_string(n) +
                                           " nodes with |u - b| in (1e-12, 1e-2); need 20");
  }
  const Scalar slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {-slope, (c + std::sqrt(c * c + 4 * consts.mu)) / 2};
}

/// Critical points of W with W < 0 inside the bounding box, from damped Newton
/// on DW started on a coarse tensor grid.
template <typename Scalar>
std::vector<Point<Scalar>> find_equilibria(const PotentialSpec<Scalar>& spec, int per_axis = 0) {
  const Box<Scalar>& box = spec.bounding_box;
  if (per_axis <= 0) {
    per_axis = std::max(3, static_cast<int>(std::floor(std::pow(4096.0, 1.0 / spec.dim))));
  }
  std::vector<Point<Scalar>> found;
  detail::scan_box(box, per_axis, [&](const Point<Scalar>& start) {
    Point<Scalar> q = start;
    Point<Scalar> g = spec.eval_grad(q);
    for (int it = 0; it < 60 && g.norm() > Scalar(1e-13); ++it) {
      const SmallMatrix<Scalar> H = hessian(spec, q);
      const Point<Scalar> step = H.completeOrthogonalDecomposition().solve(g);
      Scalar t = 1;
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls, t /= 2) {
        const Point<Scalar> trial = q - t * step;
        const Point<Scalar> gt = spec.eval_grad(trial);
        if (gt.norm() < g.norm()) {
          q = trial;
          g = gt;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (g.norm() > Scalar(1e-10) || !box.contains(q, Scalar(0)) || !(spec.eval_W(q) < 0)) return;
    for (const auto& e : found) {
      if ((e - q).norm() < Scalar(1e-6)) return;
    }
    found.push_back(q);
  });
  std::sort(found.begin(), found.end(), [](const Point<Scalar>& a, const Point<Scalar>& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return found;
}

template <typename Scalar>
struct LeftTail {
  Scalar grad_norm{};  ///< |DW(u)| + |u'| at the left end
  Scalar w{};          ///< W(u(x_left))
  Scalar dist_E = std::numeric_limits<Scalar>::infinity();
  std::optional<Point<Scalar>> nearest;
  std::string warning;
};

template <typename Scalar>
LeftTail<Scalar> left_tail_report(const PotentialSpec<Scalar>& spec, const Profile<Scalar>& p,
                                  const std::vector<Point<Scalar>>& equilibria) {
  LeftTail<Scalar> out;
  const Point<Scalar> u0 = p.at(0);
  const NodeMatrix<Scalar> du = detail::range_derivative(p.grid.nodes(), p.values, Eigen::Index(0), Eigen::Index(2));
  out.grad_norm = spec.eval_grad(u0).norm() + du.col(0).norm();
  out.w = spec.eval_W(u0);
  for (const auto& e : equilibria) {
    const Scalar dist = (u0 - e).norm();
    if (dist < out.dist_E) {
      out.dist_E = dist;
      out.nearest = e;
    }
  }
  if (equilibria.empty()) out.warning = "no equilibrium with W < 0 found in the bounding box";
  return out;
}

template <typename Scalar>
LeftTail<Scalar> left_tail_report(const PotentialSpec<Scalar>& spec, const Profile<Scalar>& p) {
  return left_tail_report(spec, p, find_equilibria(spec));
}

namespace detail {

/// Node range of the transition layer around x = 0: the connected run of nodes
/// containing node 0 on which |u'| >= 1e-2 max |u'|.
template <typename Scalar>
std::pair<Eigen::Index, Eigen::Index> transition_layer(const Profile<Scalar>& p) {
  const NodeMatrix<Scalar> du = derivative(p);
  const Eigen::Index z = p.grid.zero_index();
  Eigen::Index peak = z;
  for (Eigen::Index i = z; i > 0 && du.col(i - 1).norm() >= du.col(i).norm(); --i) peak = i - 1;
  for (Eigen::Index i = z; i + 1 < p.size() && du.col(i + 1).norm() >= du.col(peak).norm(); ++i) peak = i + 1;
  const Scalar level = Scalar(1e-2) * du.col(peak).norm();
  Eigen::Index lo = peak, hi = peak;
  while (lo > 0 && du.col(lo - 1).norm() >= level) --lo;
  while (hi + 1 < p.size() && du.col(hi + 1).norm() >= level) ++hi;
  return {lo, hi};
}

}  // namespace detail

/// Backward RK4 shot from the linearised stable manifold of b at speed c,
/// compared with the profile over the middle 60% of its transition layer after
/// the best translation. Returns the max-norm gap.
template <typename Scalar>
Scalar shooting_check(const PotentialSpec<Scalar>& spec, const PotentialConstants<Scalar>& consts, Scalar c,
                      const Profile<Scalar>& p) {
  const auto [mu, v] = slowest_mode(spec);
  const Scalar lambda = (c + std::sqrt(c * c + 4 * mu)) / 2;
  const Point<Scalar>& b = p.well_b;
  (void)consts;

  // Start where the profile is 1e-6 away from b, on the slowest eigendirection.
  Eigen::Index s = p.size() - 1;
  while (s > p.grid.zero_index() && (p.at(s) - b).norm() < Scalar(1e-6)) --s;
  if (s == p.grid.zero_index()) throw Error(ErrorKind::tail_error, "profile does not leave b on x > 0");
  const Scalar x_start = p.grid[s];
  const Point<Scalar> u_start = b + (p.at(s) - b).dot(v) * v;

  const auto [lo_node, hi_node] = detail::transition_layer(p);
  const Scalar width = p.grid[hi_node] - p.grid[lo_node];
  const Scalar cmp_lo = p.grid[lo_node] + Scalar(0.2) * width;
  const Scalar cmp_hi = p.grid[hi_node] - Scalar(0.2) * width;
  const Scalar max_shift = std::min(Scalar(1), Scalar(0.2) * width);

  // Integrate u'' = DW(u) - c u' backward from x_start to cmp_lo - max_shift.
  const Scalar h = -p.grid.spacing(std::min<Eigen::Index>(s, p.size() - 2)) / 4;
  const Scalar x_end = cmp_lo - max_shift;
  const int dim = spec.dim;
  auto rhs = [&](const Vector<Scalar>& y) {
    Vector<Scalar> f(2 * dim);
    f.head(dim) = y.tail(dim);
    f.tail(dim) = spec.eval_grad(Point<Scalar>(y.head(dim))) - c * y.tail(dim);
    return f;
  };
  const Box<Scalar>& box = spec.bounding_box;
  auto escaped = [&](const Vector<Scalar>& y) {
    for (int j = 0; j < dim; ++j) {
      const Scalar mid = (box.lo[j] + box.hi[j]) / 2, half = box.hi[j] - box.lo[j];
      if (!std::isfinite(y[j]) || std::abs(y[j] - mid) > half) return true;
    }
    return false;
  };
  std::vector<Scalar> xs{x_start};
  std::vector<Vector<Scalar>> ys;
  Vector<Scalar> y(2 * dim);
  y.head(dim) = u_start;
  y.tail(dim) = -lambda * (u_start - b);
  ys.push_back(y);
  Scalar x = x_start;
  while (x > x_end) {
    const Vector<Scalar> k1 = rhs(y);
    const Vector<Scalar> k2 = rhs(y + h / 2 * k1);
    const Vector<Scalar> k3 = rhs(y + h / 2 * k2);
    const Vector<Scalar> k4 = rhs(y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    x += h;
    if (escaped(y)) {
      if (x <= cmp_lo) break;  // past the comparison window; large shifts are simply unavailable
      throw Error(ErrorKind::shooting_divergence,
                  "shooting trajectory left the doubled bounding box at x = " + std::to_string(double(x)));
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  // Trajectory at any x: the stored samples (decreasing x), or the linear tail beyond x_start.
  auto traj = [&](Scalar xq) -> Point<Scalar> {
    if (xq >= x_start) return b + (u_start - b) * std::exp(-lambda * (xq - x_start));
    if (xq < xs.back()) return Point<Scalar>::Constant(dim, std::numeric_limits<Scalar>::infinity());
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>((x_start - xq) / -h), xs.size() - 2);
    const Scalar t = (xs[k] - xq) / (xs[k] - xs[k + 1]);
    return (1 - t) * ys[k].head(dim) + t * ys[k + 1].head(dim);
  };
  auto gap = [&](Scalar shift) {
    Scalar g = 0;
    for (Eigen::Index i = lo_node; i <= hi_node; ++i) {
      const Scalar xi = p.grid[i];
      if (xi < cmp_lo || xi > cmp_hi) continue;
      g = std::max(g, (p.at(i) - traj(xi + shift)).template lpNorm<Eigen::Infinity>());
    }
    return g;
  };
  // Coarse scan then golden section on the translation.
  Scalar best = 0, best_gap = gap(0);
  const int coarse = 40;
  for (int k = -coarse; k <= coarse; ++k) {
    const Scalar sft = max_shift * k / coarse;
    const Scalar g = gap(sft);
    if (g < best_gap) {
      best_gap = g;
      best = sft;
    }
  }
  Scalar a = best - max_shift / coarse, bb = best + max_shift / coarse;
  const Scalar phi = (std::sqrt(Scalar(5)) - 1) / 2;
  for (int it = 0; it < 40; ++it) {
    const Scalar m1 = bb - phi * (bb - a), m2 = a + phi * (bb - a);
    if (gap(m1) < gap(m2)) {
      bb = m2;
    } else {
      a = m1;
    }
  }
  return std::min(best_gap, gap((a + bb) / 2));
}

/// Every check on one (c, profile) pair. `gamma_hat` is the converged
/// objective at c (0 for an analytic wave).
template <typename Scalar>
VerifyReport<Scalar> verify_profile(const PotentialSpec<Scalar>& spec, const PotentialConstants<Scalar>& consts,
                                    Scalar c, Scalar gamma_hat, const Profile<Scalar>& p,
                                    const VerifyThresholds& th = {}, const SpeedOptions& sopts = {},
                                    Scalar proj_tol = Scalar(1e-10)) {
  VerifyReport<Scalar> r;
  r.c = c;
  r.gamma_hat = gamma_hat;
  r.el_residual = detail::make_check(double(el_residual(spec, c, p, gamma_hat, proj_tol)), th.el);

  const auto [fl, fr] = first_integral_residual(spec, c, p);
  r.first_integral_left = detail::make_check(double(fl), th.first_integral);
  r.first_integral_right = detail::make_check(double(fr), th.first_integral);

  const auto hl = halfline_identities(spec, c, p);
  r.halfline_right = detail::make_check(double(hl[0]), th.halfline);
  r.halfline_left = detail::make_check(double(hl[1]), th.halfline);
  r.a15 = detail::make_check(double(hl[2]), th.halfline);

  r.jump_gap = detail::make_check(double(jump_identity_gap(c, gamma_hat, p)), th.jump);
  {
    const auto [dl, dr] = derivative_jump_at_zero(p);
    const Scalar jump = dr.squaredNorm() - dl.squaredNorm();
    // Mismatch magnitude: nonzero only when gamma is resolved above the gap
    // tolerance and the jump points the other way.
    const bool resolved = std::abs(gamma_hat) > Scalar(th.jump);
    const bool agree = (jump > 0) == (gamma_hat > 0);
    r.jump_sign = detail::make_check(resolved && !agree ? double(std::abs(jump) / (2 * c)) : 0.0, 0.0);
  }

  try {
    const auto [fit, theory] = fit_decay_rate(consts, c, p);
    r.decay_lambda_fit = fit;
    r.decay_lambda_theory = theory;
    r.decay.value = double(fit);
    r.decay.threshold = double(c) - th.decay_slack;
    r.decay.pass = fit > c - Scalar(th.decay_slack);
    r.decay.evaluated = true;
  } catch (const Error& e) {
    r.decay.evaluated = true;
    r.decay.pass = false;
    r.decay.note = e.what();
  }

  const LeftTail<Scalar> lt = left_tail_report(spec, p);
  r.left_tail_grad = detail::make_check(double(lt.grad_norm), th.left_tail);
  r.left_tail_W_limit = lt.w;
  r.dist_to_equilibria = lt.dist_E;
  r.nearest_equilibrium = lt.nearest;
  if (!lt.warning.empty()) r.left_tail_grad.note = lt.warning;
  {
    // min of W on x <= 0 is reached (within tolerance) in the left 20% of the grid, near the end value.
    const Eigen::Index z = p.grid.zero_index();
    const Scalar x_cut = p.grid.x_left() + Scalar(0.2) * (p.grid.x_right() - p.grid.x_left());
    Scalar wmin = std::numeric_limits<Scalar>::infinity(), wmin_left = wmin;
    for (Eigen::Index i = 0; i <= z; ++i) {
      const Scalar w = spec.eval_W(p.at(i));
      wmin = std::min(wmin, w);
      if (p.grid[i] <= x_cut) wmin_left = std::min(wmin_left, w);
    }
    r.left_tail_min = detail::make_check(double(std::max(lt.w - wmin, wmin_left - wmin)), th.left_tail);
  }

  if (std::abs(gamma_hat) <= gamma_zero_tol(consts, c, sopts)) {
    try {
      r.shooting = detail::make_check(double(shooting_check(spec, consts, c, p)), th.shooting);
    } catch (const Error& e) {
      r.shooting.evaluated = true;
      r.shooting.pass = false;
      r.shooting.threshold = th.shooting;
      r.shooting.value = std::numeric_limits<double>::infinity();
      r.shooting.note = e.what();
    }
  } else {
    r.shooting.threshold = th.shooting;
    r.shooting.note = "skipped: gamma is not zero at this speed";
  }

  r.pass = true;
  for (const auto& [name, chk] : r.checks()) {
    if (chk->evaluated && !chk->pass) r.pass = false;
  }
  return r;
}

}  // namespace wave

#endif  // WAVE_VERIFY_HPP
