#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "wave/profile.hpp"

using namespace wave;

TEST_CASE("uniform grid places 0 on a node") {
  const auto g = Grid<double>::uniform(-3.3, 2.05, 0.1);
  CHECK(g[g.zero_index()] == 0.0);
  CHECK(g.x_left() <= -3.3);
  CHECK(g.x_right() >= 2.05);
  for (Eigen::Index k = 0; k + 1 < g.size(); ++k) CHECK(g.spacing(k) == doctest::Approx(0.1));
}

TEST_CASE("geometric grid refines toward 0") {
  const auto g = Grid<double>::geometric(-10, 5, 0.01, 1.05, 0.2);
  CHECK(g[g.zero_index()] == 0.0);
  CHECK(g.spacing(g.zero_index()) == doctest::Approx(0.01));
  CHECK(g.spacing(0) > g.spacing(g.zero_index() - 1));
  for (Eigen::Index k = 0; k + 1 < g.size(); ++k) CHECK(g.spacing(k) <= 0.2 + 1e-12);
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(Grid<double>::uniform(-1, 1, -0.1), Error);
  CHECK_THROWS_AS(Grid<double>::uniform(1, 2, 0.1), Error);
  Vector<double> x(3);
  x << -1, 1, 2;
  CHECK_THROWS_AS(Grid<double>(x, Spacing::uniform), Error);
}

TEST_CASE("derivative of tanh is second order") {
  auto err = [](double h) {
    const auto g = Grid<double>::uniform(-5, 5, h);
    const auto p = sample_profile(g, Point<double>::Constant(1, std::tanh(g.x_right())),
                                  [](double x) { return Point<double>::Constant(1, std::tanh(x)); });
    const auto d = derivative(p);
    double e = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double ex = 1 - std::tanh(g[i]) * std::tanh(g[i]);
      e = std::max(e, std::abs(d(0, i) - ex));
    }
    return e;
  };
  const double e1 = err(0.02), e2 = err(0.01);
  CHECK(e1 / e2 > 3.5);
  CHECK(e2 < 1e-3);
}

TEST_CASE("one-sided derivatives see a kink") {
  const auto g = Grid<double>::uniform(-1, 1, 0.1);
  const auto p = sample_profile(g, Point<double>::Constant(1, 2.0),
                                [](double x) { return Point<double>::Constant(1, x < 0 ? -x : 2 * x); });
  const auto [l, r] = derivative_jump_at_zero(p);
  CHECK(l[0] == doctest::Approx(-1));
  CHECK(r[0] == doctest::Approx(2));
}

TEST_CASE("interpolation is linear between nodes and constant outside") {
  const auto g = Grid<double>::uniform(-1, 1, 0.5);
  const auto p = sample_profile(g, Point<double>::Constant(1, 1.0),
                                [](double x) { return Point<double>::Constant(1, 3 * x - 2); });
  CHECK(interpolate(p, 0.25)[0] == doctest::Approx(-1.25));
  CHECK(interpolate(p, -7.0)[0] == doctest::Approx(-5));
  CHECK(interpolate(p, 9.0)[0] == doctest::Approx(1));
}

TEST_CASE("initial profile is admissible") {
  for (int which = 0; which < 2; ++which) {
    const auto spec = which == 0 ? scalar_cubic(0.6) : decoupled_quartic(0.6, 1.2);
    const auto k = compute_constants(spec);
    const auto g = Grid<double>::uniform(-10, 10, 0.01);
    const auto p = initial_profile(spec, k, g);
    CHECK(std::abs(spec.eval_W(p.at(g.zero_index()))) <= 1e-10);
    CHECK((p.at(p.size() - 1) - spec.well_b).norm() == 0.0);
    for (Eigen::Index i = g.zero_index() + 1; i < p.size(); ++i) CHECK(spec.eval_W(p.at(i)) >= -1e-10);
    CHECK((p.at(0) - k.point_a).norm() < 1e-12);
  }
}

TEST_CASE("translate_to_gamma moves the last crossing to node 0") {
  const auto spec = scalar_cubic(0.6);
  const auto g = Grid<double>::uniform(-10, 10, 0.01);
  const auto p = sample_profile(g, spec.well_b, [](double x) { return Point<double>::Constant(1, std::tanh(x - 2)); });
  const auto q = translate_to_gamma(spec, p);
  CHECK(q.at(g.zero_index())[0] == doctest::Approx(oracle::gamma_root(0.6)).epsilon(1e-9));
  for (Eigen::Index i = g.zero_index() + 1; i < q.size(); ++i) CHECK(spec.eval_W(q.at(i)) >= -1e-10);

  const auto c = constant_profile(g, spec.well_b, spec.well_b);
  try {
    translate_to_gamma(spec, c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_crossing);
  }
}

TEST_CASE("shift and resample") {
  const auto g = Grid<double>::uniform(-5, 5, 0.01);
  const auto p = sample_profile(g, Point<double>::Constant(1, std::tanh(5.0)),
                                [](double x) { return Point<double>::Constant(1, std::tanh(x)); });
  const auto s = shift_profile(p, 0.5);
  const Eigen::Index z = g.zero_index();
  CHECK(s.at(z)[0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-6));
  const auto coarse = resample(p, Grid<double>::uniform(-5, 5, 0.1));
  CHECK(coarse.size() == 101);
  CHECK(coarse.at(60)[0] == doctest::Approx(std::tanh(1.0)).epsilon(1e-6));
}
