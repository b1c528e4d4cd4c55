#ifndef WAVE_PROFILE_HPP
#define WAVE_PROFILE_HPP

#include "wave/potential.hpp"
#include "wave/types.hpp"

#include <type_traits>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace wave {

enum class Spacing { uniform, geometric };

/// Node set on a truncated line. Node `zero_index()` sits exactly at x = 0.
template <typename Scalar>
class Grid {
 public:
  Grid() = default;

  Grid(Vector<Scalar> nodes, Spacing spacing) : nodes_(std::move(nodes)), spacing_(spacing) {
    if (nodes_.size() < 3) throw Error(ErrorKind::contract_violation, "grid needs at least 3 nodes");
    zero_ = -1;
    for (Eigen::Index i = 0; i < nodes_.size(); ++i) {
      if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
        throw Error(ErrorKind::contract_violation, "grid nodes must be strictly increasing");
      }
      if (nodes_[i] == Scalar(0)) {
        if (zero_ >= 0) throw Error(ErrorKind::contract_violation, "0 appears twice in grid");
        zero_ = i;
      }
    }
    if (zero_ <= 0 || zero_ >= nodes_.size() - 1) {
      throw Error(ErrorKind::contract_violation, "grid must contain 0 as an interior node");
    }
  }

  /// Multiples of h covering [x_left, x_right]; the ends are rounded outward.
  static Grid uniform(Scalar x_left, Scalar x_right, Scalar h) {
    if (!(h > 0) || !(x_left < 0) || !(x_right > 0)) {
      throw Error(ErrorKind::contract_violation, "uniform grid requires h > 0 and x_left < 0 < x_right");
    }
    const auto left = static_cast<Eigen::Index>(std::ceil(-x_left / h - Scalar(1e-9)));
    const auto right = static_cast<Eigen::Index>(std::ceil(x_right / h - Scalar(1e-9)));
    Vector<Scalar> x(left + right + 1);
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = Scalar(k - left) * h;
    x[left] = 0;
    return Grid(std::move(x), Spacing::uniform);
  }

  /// Spacing h0 at 0, growing by `ratio` per cell away from 0 up to h_max.
  static Grid geometric(Scalar x_left, Scalar x_right, Scalar h0, Scalar ratio, Scalar h_max) {
    if (!(h0 > 0) || !(ratio >= 1) || !(h_max >= h0) || !(x_left < 0) || !(x_right > 0)) {
      throw Error(ErrorKind::contract_violation, "invalid geometric grid parameters");
    }
    auto side = [&](Scalar extent) {
      std::vector<Scalar> pts;
      Scalar x = 0, h = h0;
      while (x < extent) {
        x += h;
        pts.push_back(x);
        h = std::min(h * ratio, h_max);
      }
      return pts;
    };
    const auto l = side(-x_left);
    const auto r = side(x_right);
    Vector<Scalar> x(static_cast<Eigen::Index>(l.size() + r.size() + 1));
    Eigen::Index k = 0;
    for (auto it = l.rbegin(); it != l.rend(); ++it) x[k++] = -*it;
    x[k++] = 0;
    for (Scalar v : r) x[k++] = v;
    return Grid(std::move(x), Spacing::geometric);
  }

  const Vector<Scalar>& nodes() const { return nodes_; }
  Eigen::Index size() const { return nodes_.size(); }
  Eigen::Index zero_index() const { return zero_; }
  Scalar operator[](Eigen::Index i) const { return nodes_[i]; }
  Scalar x_left() const { return nodes_[0]; }
  Scalar x_right() const { return nodes_[nodes_.size() - 1]; }
  Scalar spacing(Eigen::Index cell) const { return nodes_[cell + 1] - nodes_[cell]; }
  Spacing spacing_policy() const { return spacing_; }

 private:
  Vector<Scalar> nodes_;
  Eigen::Index zero_ = -1;
  Spacing spacing_ = Spacing::uniform;
};

/// Discrete profile: one R^n value per node; the last node carries b exactly.
template <typename Scalar>
struct Profile {
  Grid<Scalar> grid;
  NodeMatrix<Scalar> values;  ///< dim x nodes
  Point<Scalar> well_b;

  int dim() const { return static_cast<int>(values.rows()); }
  Eigen::Index size() const { return values.cols(); }
  Point<Scalar> at(Eigen::Index i) const { return values.col(i); }
};

/// Builds a profile from samples, pinning the right end to b.
template <typename Scalar>
Profile<Scalar> make_profile(Grid<Scalar> grid, NodeMatrix<Scalar> values, Point<Scalar> well_b) {
  if (values.cols() != grid.size() || values.rows() != well_b.size()) {
    throw Error(ErrorKind::contract_violation, "profile values do not match grid/dimension");
  }
  values.col(values.cols() - 1) = well_b;
  return Profile<Scalar>{std::move(grid), std::move(values), std::move(well_b)};
}

template <typename Scalar, typename F>
Profile<Scalar> sample_profile(const Grid<Scalar>& grid, const std::type_identity_t<Point<Scalar>>& well_b, F&& f) {
  NodeMatrix<Scalar> v(well_b.size(), grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) v.col(i) = f(grid[i]);
  return make_profile(grid, std::move(v), well_b);
}

template <typename Scalar>
Profile<Scalar> constant_profile(const Grid<Scalar>& grid, const Point<Scalar>& value,
                                 const Point<Scalar>& well_b) {
  return sample_profile(grid, well_b, [&](Scalar) { return value; });
}

// ---------------------------------------------------------------------------
// Discrete calculus

/// Three-point derivative weights at x0 for nodes (x0, x1, x2), any order.
template <typename Scalar>
std::array<Scalar, 3> derivative_weights(Scalar x0, Scalar x1, Scalar x2) {
  const Scalar a = x1 - x0, b = x2 - x0;
  return {-(a + b) / (a * b), b / (a * (b - a)), -a / (b * (b - a))};
}

/// Second-order first derivative at every node (centered inside, one-sided at the ends).
template <typename Scalar>
NodeMatrix<Scalar> derivative(const Profile<Scalar>& p) {
  const auto& x = p.grid.nodes();
  const Eigen::Index n = p.size();
  if (n < 3) throw Error(ErrorKind::contract_violation, "derivative needs at least 3 nodes");
  NodeMatrix<Scalar> d(p.dim(), n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const auto w = derivative_weights(x[i], x[i - 1], x[i + 1]);
    d.col(i) = w[0] * p.values.col(i) + w[1] * p.values.col(i - 1) + w[2] * p.values.col(i + 1);
  }
  {
    const auto w = derivative_weights(x[0], x[1], x[2]);
    d.col(0) = w[0] * p.values.col(0) + w[1] * p.values.col(1) + w[2] * p.values.col(2);
  }
  {
    const auto w = derivative_weights(x[n - 1], x[n - 2], x[n - 3]);
    d.col(n - 1) = w[0] * p.values.col(n - 1) + w[1] * p.values.col(n - 2) + w[2] * p.values.col(n - 3);
  }
  return d;
}

/// Second-order one-sided derivatives at node i: (from the left, from the right).
template <typename Scalar>
std::pair<Point<Scalar>, Point<Scalar>> one_sided_derivatives(const Profile<Scalar>& p, Eigen::Index i) {
  const auto& x = p.grid.nodes();
  if (i < 2 || i + 2 >= p.size()) {
    throw Error(ErrorKind::contract_violation, "one-sided derivative needs two nodes on each side");
  }
  const auto wl = derivative_weights(x[i], x[i - 1], x[i - 2]);
  const auto wr = derivative_weights(x[i], x[i + 1], x[i + 2]);
  Point<Scalar> left = wl[0] * p.values.col(i) + wl[1] * p.values.col(i - 1) + wl[2] * p.values.col(i - 2);
  Point<Scalar> right = wr[0] * p.values.col(i) + wr[1] * p.values.col(i + 1) + wr[2] * p.values.col(i + 2);
  return {left, right};
}

/// One-sided derivatives at x = 0.
template <typename Scalar>
std::pair<Point<Scalar>, Point<Scalar>> derivative_jump_at_zero(const Profile<Scalar>& p) {
  return one_sided_derivatives(p, p.grid.zero_index());
}

/// Piecewise-linear value at x; constant extension outside the grid
/// (left end value on the left, b on the right).
template <typename Scalar>
Point<Scalar> interpolate(const Profile<Scalar>& p, Scalar x) {
  const auto& nodes = p.grid.nodes();
  const Eigen::Index n = p.size();
  if (x <= nodes[0]) return p.values.col(0);
  if (x >= nodes[n - 1]) return p.well_b;
  const Scalar* begin = nodes.data();
  const Eigen::Index k = std::upper_bound(begin, begin + n, x) - begin - 1;
  const Scalar t = (x - nodes[k]) / (nodes[k + 1] - nodes[k]);
  return (1 - t) * p.values.col(k) + t * p.values.col(k + 1);
}

/// v(x) = u(x + shift) re-sampled on `grid`.
template <typename Scalar>
Profile<Scalar> shift_profile(const Profile<Scalar>& p, Scalar shift, const Grid<Scalar>& grid) {
  return sample_profile(grid, p.well_b, [&](Scalar x) { return interpolate(p, x + shift); });
}

template <typename Scalar>
Profile<Scalar> shift_profile(const Profile<Scalar>& p, Scalar shift) {
  return shift_profile(p, shift, p.grid);
}

template <typename Scalar>
Profile<Scalar> resample(const Profile<Scalar>& p, const Grid<Scalar>& grid) {
  return shift_profile(p, Scalar(0), grid);
}

// ---------------------------------------------------------------------------
// Admissible starting profiles

/// Piecewise-linear a -> b on [0, 1] shifted so that its last Gamma crossing
/// sits at x = 0, sampled on `grid`.
template <typename Scalar>
Profile<Scalar> initial_profile(const PotentialSpec<Scalar>& spec, const PotentialConstants<Scalar>& consts,
                                const Grid<Scalar>& grid, const ProjectionOptions& popts = {}) {
  using P = Point<Scalar>;
  const P& a = consts.point_a;
  const P& b = spec.well_b;
  auto seg = [&](Scalar t) { return P(a + std::clamp(t, Scalar(0), Scalar(1)) * (b - a)); };
  auto w = [&](Scalar t) { return spec.eval_W(seg(t)); };

  // Largest t with W(seg(t)) = 0 and W >= 0 to its right: scan down from b.
  constexpr int kScan = 4000;
  Scalar lo = -1, hi = 1;
  for (int i = kScan - 1; i >= 0; --i) {
    const Scalar t = Scalar(i) / kScan;
    if (w(t) < 0) {
      lo = t;
      hi = Scalar(i + 1) / kScan;
      break;
    }
  }
  if (lo < 0) {
    throw Error(ErrorKind::assumption_violation, "segment from a to b never enters {W < 0}");
  }
  for (int i = 0; i < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon(); ++i) {
    const Scalar mid = (lo + hi) / 2;
    if (w(mid) < 0) lo = mid; else hi = mid;
  }
  const Scalar x0 = hi;
  auto prof = sample_profile(grid, b, [&](Scalar x) { return seg(x + x0); });
  prof.values.col(grid.zero_index()) = project_to_gamma(spec, P(seg(x0)), popts);
  return prof;
}

/// Shifts the profile so its last Gamma crossing lands on node 0, then
/// projects the node-0 value onto Gamma.
template <typename Scalar>
Profile<Scalar> translate_to_gamma(const PotentialSpec<Scalar>& spec, const Profile<Scalar>& p,
                                   const ProjectionOptions& popts = {}) {
  using P = Point<Scalar>;
  const Scalar tol = Scalar(popts.tol);
  const Eigen::Index z = p.grid.zero_index();
  Eigen::Index last_neg = -1;
  for (Eigen::Index i = p.size() - 1; i >= 0; --i) {
    if (spec.eval_W(p.at(i)) < -tol) {
      last_neg = i;
      break;
    }
  }
  if (last_neg < 0) throw Error(ErrorKind::no_crossing, "profile never enters {W < 0}");
  if (last_neg == p.size() - 1) {
    throw Error(ErrorKind::no_crossing, "profile ends inside {W < 0}");
  }

  Profile<Scalar> out = p;
  if (!(last_neg == z - 1 && std::abs(spec.eval_W(p.at(z))) <= tol)) {
    const P u0 = p.at(last_neg), u1 = p.at(last_neg + 1);
    auto w = [&](Scalar t) { return spec.eval_W(P(u0 + t * (u1 - u0))); };
    Scalar lo = 0, hi = 1;
    for (int i = 0; i < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon(); ++i) {
      const Scalar mid = (lo + hi) / 2;
      if (w(mid) < 0) lo = mid; else hi = mid;
    }
    const Scalar shift = p.grid[last_neg] + hi * p.grid.spacing(last_neg);
    out = shift_profile(p, shift);
  }
  out.values.col(z) = project_to_gamma(spec, out.at(z), popts);
  return out;
}

}  // namespace wave

#endif  // WAVE_PROFILE_HPP
