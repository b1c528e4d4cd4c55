#ifndef WAVE_FUNCTIONAL_HPP
#define WAVE_FUNCTIONAL_HPP

#include "wave/potential.hpp"
#include "wave/profile.hpp"
#include "wave/types.hpp"

#include <cmath>
#include <string>

namespace wave {

enum class WeightNormalization { none, shift_by_x0 };

/// Parameters of the weighted energy J(c, u) = int e^{cx} (|u'|^2/2 + W(u)) dx.
template <typename Scalar>
struct FunctionalParams {
  Scalar c{1};
  Scalar penalty_kappa{1e3};
  WeightNormalization weight_normalization = WeightNormalization::none;
  /// Reference point for shift_by_x0: every weight is multiplied by e^{-c x_ref}.
  Scalar x_ref{0};
};

/// Lower/upper estimates of gamma(c) and the bracket on the zero c*.
template <typename Scalar>
struct BoundsReport {
  Scalar c{};
  Scalar lower{};
  Scalar upper{};
  Scalar bracket_lo{};
  Scalar bracket_hi{};
};

inline constexpr double kMaxWeightExponent = 600.0;

/// Exact cell integrals of the exponential weight, e^{c x} over [x_k, x_{k+1}].
template <typename Scalar>
Vector<Scalar> cell_weights(const Grid<Scalar>& grid, const FunctionalParams<Scalar>& params) {
  const Scalar c = params.c;
  if (!(c > 0)) throw Error(ErrorKind::contract_violation, "wave speed c must be positive");
  const Scalar ref = params.weight_normalization == WeightNormalization::shift_by_x0 ? params.x_ref : Scalar(0);
  if (c * (grid.x_right() - ref) > Scalar(kMaxWeightExponent)) {
    throw Error(ErrorKind::overflow,
                "c * x_right exceeds " + std::to_string(kMaxWeightExponent) +
                    "; enable shift_by_x0 weight normalization or shorten the grid");
  }
  Vector<Scalar> w(grid.size() - 1);
  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
    const Scalar h = grid.spacing(k);
    // Far-left weights are floored instead of underflowing to zero.
    w[k] = std::exp(std::max(c * (grid[k] - ref), Scalar(-700))) * std::expm1(c * h) / c;
  }
  return w;
}

/// Per-node lumped weights: half of each adjacent cell.
template <typename Scalar>
Vector<Scalar> node_weights(const Vector<Scalar>& cells) {
  Vector<Scalar> w = Vector<Scalar>::Zero(cells.size() + 1);
  w.head(cells.size()) += cells / 2;
  w.tail(cells.size()) += cells / 2;
  return w;
}

namespace detail {

template <typename Scalar>
void check_profile(const PotentialSpec<Scalar>& spec, const Profile<Scalar>& p) {
  if (p.dim() != spec.dim) throw Error(ErrorKind::contract_violation, "profile dimension mismatch");
  if ((p.values.col(p.size() - 1) - spec.well_b).norm() != Scalar(0)) {
    throw Error(ErrorKind::contract_violation, "profile right boundary is not b");
  }
}

}  // namespace detail

/// Discrete J: per cell, the exact weight integral times the cell sample
/// |du/dx|^2/2 + (W(u_k) + W(u_{k+1}))/2.
template <typename Scalar>
Scalar eval_J(const PotentialSpec<Scalar>& spec, const FunctionalParams<Scalar>& params,
              const Profile<Scalar>& p) {
  detail::check_profile(spec, p);
  const Vector<Scalar> omega = cell_weights(p.grid, params);
  Scalar total = 0;
  Scalar w_prev = spec.eval_W(p.at(0));
  for (Eigen::Index k = 0; k + 1 < p.size(); ++k) {
    const Scalar h = p.grid.spacing(k);
    const Scalar w_next = spec.eval_W(p.at(k + 1));
    const Scalar slope2 = (p.values.col(k + 1) - p.values.col(k)).squaredNorm() / (h * h);
    total += omega[k] * (slope2 / 2 + (w_prev + w_next) / 2);
    w_prev = w_next;
  }
  return total;
}

/// kappa * int_0^{x_right} e^{cx} max(0, -W(u))^2 dx, same quadrature as eval_J.
template <typename Scalar>
Scalar eval_penalty(const PotentialSpec<Scalar>& spec, const FunctionalParams<Scalar>& params,
                    const Profile<Scalar>& p) {
  detail::check_profile(spec, p);
  if (params.penalty_kappa == Scalar(0)) return 0;
  const Vector<Scalar> omega = cell_weights(p.grid, params);
  const Eigen::Index z = p.grid.zero_index();
  auto phi = [&](Eigen::Index i) {
    const Scalar v = std::max(Scalar(0), -spec.eval_W(p.at(i)));
    return v * v;
  };
  Scalar total = 0;
  for (Eigen::Index k = z; k + 1 < p.size(); ++k) total += omega[k] * (phi(k) + phi(k + 1)) / 2;
  return params.penalty_kappa * total;
}

/// Gradient of eval_J + eval_penalty with respect to every node value. The
/// last column (the pinned right boundary) is zero; the node-0 constraint is
/// left to the caller.
template <typename Scalar>
NodeMatrix<Scalar> grad_J(const PotentialSpec<Scalar>& spec, const FunctionalParams<Scalar>& params,
                          const Profile<Scalar>& p) {
  detail::check_profile(spec, p);
  const Vector<Scalar> omega = cell_weights(p.grid, params);
  const Eigen::Index n = p.size();
  const Eigen::Index z = p.grid.zero_index();
  NodeMatrix<Scalar> g = NodeMatrix<Scalar>::Zero(p.dim(), n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const Scalar h = p.grid.spacing(k);
    const auto diff = (p.values.col(k + 1) - p.values.col(k)) * (omega[k] / (h * h));
    g.col(k) -= diff;
    g.col(k + 1) += diff;
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Scalar left = i > 0 ? omega[i - 1] : Scalar(0);
    const Scalar right = omega[i];
    const Point<Scalar> u = p.at(i);
    const Point<Scalar> dw = spec.eval_grad(u);
    g.col(i) += (left + right) / 2 * dw;
    if (params.penalty_kappa > 0 && i >= z) {
      const Scalar neg = std::max(Scalar(0), -spec.eval_W(u));
      if (neg > 0) {
        const Scalar lumped = (i > z ? left : Scalar(0)) / 2 + right / 2;
        g.col(i) += params.penalty_kappa * lumped * (-2 * neg) * dw;
      }
    }
  }
  g.col(n - 1).setZero();
  return g;
}

/// Energy estimates around gamma(c) and the bracket on its zero, from m, M, d.
template <typename Scalar>
BoundsReport<Scalar> compute_bounds(const PotentialSpec<Scalar>& spec, const PotentialConstants<Scalar>& k,
                                    Scalar c) {
  if (!(c > 0)) throw Error(ErrorKind::contract_violation, "c must be positive");
  const Scalar ab2 = (spec.well_b - k.point_a).squaredNorm();
  BoundsReport<Scalar> r;
  r.c = c;
  r.lower = c * k.d * k.d / 2 - k.m / c;
  r.upper = ((ab2 / 2 + k.M) * std::expm1(c) - k.m * std::exp(-c)) / c;
  r.bracket_lo = std::log((1 + std::sqrt(1 + 8 * k.m / (ab2 + 2 * k.M))) / 2);
  r.bracket_hi = std::sqrt(2 * k.m) / k.d;
  return r;
}

}  // namespace wave

#endif  // WAVE_FUNCTIONAL_HPP
