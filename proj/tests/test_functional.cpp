#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "wave/functional.hpp"

#include <random>

using namespace wave;

namespace {

/// Simpson quadrature of e^{cx}(sech^4(x+x0)/2 + W(tanh(x+x0))) on [a, b].
double tanh_energy(double c, double alpha, double a, double b, int n = 400000) {
  const double x0 = std::atanh(oracle::gamma_root(alpha));
  auto f = [&](double x) {
    const double t = std::tanh(x + x0);
    const double d = 1 - t * t;
    return std::exp(c * x) * (d * d / 2 + oracle::quartic(t, alpha));
  };
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4 : 2) * f(a + k * h);
  return acc * h / 3;
}

double objective(const PotentialSpec<double>& spec, const FunctionalParams<double>& params, const Profile<double>& p) {
  return eval_J(spec, params, p) + eval_penalty(spec, params, p);
}

}  // namespace

TEST_CASE("cell weights integrate e^{cx} exactly") {
  const auto g = Grid<double>::uniform(-20, 5, 0.05);
  FunctionalParams<double> params;
  params.c = 0.7;
  const auto w = cell_weights(g, params);
  const double exact = (std::exp(0.7 * g.x_right()) - std::exp(0.7 * g.x_left())) / 0.7;
  CHECK(w.sum() == doctest::Approx(exact).epsilon(1e-12));
  CHECK((w.array() > 0).all());
}

TEST_CASE("weight overflow is detected and shift_by_x0 avoids it") {
  const auto g = Grid<double>::uniform(-10, 400, 0.5);
  FunctionalParams<double> params;
  params.c = 2;
  try {
    cell_weights(g, params);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::overflow);
  }
  params.weight_normalization = WeightNormalization::shift_by_x0;
  params.x_ref = 390;
  CHECK(std::isfinite(cell_weights(g, params).sum()));
}

TEST_CASE("J of the exact wave against quadrature") {
  const auto spec = scalar_cubic(0.6);
  const auto g = Grid<double>::uniform(-80, 12, 0.01);
  const auto p = oracle::tanh_wave(g, 0.6);
  for (double c : {0.6, 0.7, 0.45}) {
    FunctionalParams<double> params;
    params.c = c;
    // the sampled profile is pinned to b at x_right; the quadrature keeps tanh
    const double ref = tanh_energy(c, 0.6, g.x_left(), g.x_right());
    CHECK(eval_J(spec, params, p) == doctest::Approx(ref).epsilon(1e-4).scale(1));
  }
  FunctionalParams<double> at_speed;
  at_speed.c = 0.6;
  CHECK(std::abs(eval_J(spec, at_speed, p)) < 1e-4);
}

TEST_CASE("penalty on a hand-sized example") {
  const auto spec = scalar_cubic(0.6);
  const auto g = Grid<double>::uniform(-1, 1, 0.5);
  NodeMatrix<double> v(1, 5);
  v << -1, -1, 1, -1, 1;  // W = -0.8 at x = 0.5
  const auto p = make_profile(g, v, spec.well_b);
  FunctionalParams<double> params;
  params.c = 1;
  params.penalty_kappa = 1000;
  const double e = std::exp(0.5);
  const double expected = 1000 * 0.64 / 2 * (1 + e) * (e - 1);
  CHECK(eval_penalty(spec, params, p) == doctest::Approx(expected).epsilon(1e-12));
  params.penalty_kappa = 0;
  CHECK(eval_penalty(spec, params, p) == 0.0);
}

TEST_CASE("grad_J matches central differences") {
  std::mt19937 rng(11);
  for (int which = 0; which < 2; ++which) {
    const auto spec = which == 0 ? scalar_cubic(0.6) : decoupled_quartic(0.6, 1.2);
    const auto k = compute_constants(spec);
    const auto g = Grid<double>::uniform(-6, 4, 0.1);
    for (int trial = 0; trial < 5; ++trial) {
      auto p = oracle::random_profile(g, k.point_a, spec.well_b, rng);
      FunctionalParams<double> params;
      params.c = which == 0 ? 0.6 : 1.2;
      const auto grad = grad_J(spec, params, p);
      double worst = 0;
      for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
        for (int j = 0; j < spec.dim; ++j) {
          const double h = 1e-6;
          auto plus = p, minus = p;
          plus.values(j, i) += h;
          minus.values(j, i) -= h;
          const double fd = (objective(spec, params, plus) - objective(spec, params, minus)) / (2 * h);
          worst = std::max(worst, std::abs(fd - grad(j, i)));
        }
      }
      CHECK(worst / grad.lpNorm<Eigen::Infinity>() < 1e-6);
      CHECK(grad.col(p.size() - 1).norm() == 0.0);
    }
  }
}

TEST_CASE("bounds and bracket") {
  const auto d = decoupled_quartic(0.6, 1.2);
  const auto kd = compute_constants(d);
  const auto bd = compute_bounds(d, kd, 1.0);
  CHECK(bd.bracket_lo < 1.2);
  CHECK(bd.bracket_hi > 1.2);

  const auto s = scalar_cubic(0.6);
  const auto ks = compute_constants(s);
  const auto bs = compute_bounds(s, ks, 0.6);
  CHECK(bs.bracket_hi == doctest::Approx(std::sqrt(1.6) / oracle::distance_d(0.6)).epsilon(1e-8));
  CHECK(bs.bracket_lo < 0.6);
  for (double c : {0.1, 0.3, 0.6, 1.0, 3.0}) {
    const auto b = compute_bounds(s, ks, c);
    CHECK(b.lower <= b.upper);
  }
  CHECK_THROWS_AS(compute_bounds(s, ks, -1.0), Error);
}

TEST_CASE("J is zero on the constant b profile") {
  const auto spec = decoupled_quartic(0.6, 1.2);
  const auto g = Grid<double>::uniform(-5, 5, 0.1);
  const auto p = constant_profile(g, spec.well_b, spec.well_b);
  FunctionalParams<double> params;
  CHECK(eval_J(spec, params, p) == 0.0);
  CHECK(grad_J(spec, params, p).norm() == 0.0);
}
