#ifndef WAVE_TYPES_HPP
#define WAVE_TYPES_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace wave {

/// Upper bound on the number of components. Points are stored in
/// fixed-capacity Eigen vectors so that evaluating W at every node of a
/// profile never touches the heap.
inline constexpr int kMaxDim = 8;

template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

template <typename Scalar>
using SmallMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Node values of a profile: one column per grid node, one row per component.
template <typename Scalar>
using NodeMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class ErrorKind {
  contract_violation,
  assumption_violation,
  degenerate_projection,
  non_convergence,
  no_crossing,
  overflow,
  infeasible_minimizer,
  bracket_failure,
  not_a_wave,
  tail_error,
  shooting_divergence,
  config_error,
  csv_error,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::contract_violation: return "contract violation";
    case ErrorKind::assumption_violation: return "assumption violation";
    case ErrorKind::degenerate_projection: return "degenerate projection";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::no_crossing: return "no crossing";
    case ErrorKind::overflow: return "weight overflow";
    case ErrorKind::infeasible_minimizer: return "infeasible minimizer";
    case ErrorKind::bracket_failure: return "bracket failure";
    case ErrorKind::not_a_wave: return "not a wave";
    case ErrorKind::tail_error: return "tail error";
    case ErrorKind::shooting_divergence: return "shooting divergence";
    case ErrorKind::config_error: return "config error";
    case ErrorKind::csv_error: return "csv error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <typename Scalar>
Point<Scalar> to_point(const Eigen::Ref<const Vector<Scalar>>& v) {
  Point<Scalar> p(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) p[i] = v[i];
  return p;
}

}  // namespace wave

#endif  // WAVE_TYPES_HPP
