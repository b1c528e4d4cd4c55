#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "wave/potential.hpp"

#include <random>

using namespace wave;
using P = Point<double>;

namespace {

P pt(std::initializer_list<double> v) {
  P p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

}  // namespace

TEST_CASE("decoupled quartic values at the wells") {
  const auto spec = decoupled_quartic(0.6, 1.2);
  CHECK(eval_potential(spec, pt({1, 1})) == 0.0);
  CHECK(eval_potential(spec, pt({-1, 1})) == doctest::Approx(-0.8).epsilon(1e-14));
  CHECK(eval_potential(spec, pt({-1, -1})) == doctest::Approx(-2.4).epsilon(1e-14));
  // quadrature of the derivative agrees with the closed form
  CHECK(oracle::quartic_simpson(-1, 0.6) == doctest::Approx(-0.8).epsilon(1e-10));
  CHECK(oracle::quartic_simpson(-1, 1.2) == doctest::Approx(-1.6).epsilon(1e-10));
}

TEST_CASE("builtin W matches the quartic antiderivative") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  const auto s = scalar_cubic(0.6);
  const auto d = decoupled_quartic(0.6, 1.2);
  for (int k = 0; k < 200; ++k) {
    const double a = u(rng), b = u(rng);
    CHECK(eval_potential(s, pt({a})) == doctest::Approx(oracle::quartic(a, 0.6)).epsilon(1e-12));
    CHECK(eval_potential(d, pt({a, b})) ==
          doctest::Approx(oracle::quartic(a, 0.6) + oracle::quartic(b, 1.2)).epsilon(1e-12));
  }
}

TEST_CASE("dimension mismatch is a contract violation") {
  const auto spec = decoupled_quartic(0.6, 1.2);
  try {
    eval_potential(spec, pt({1}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::contract_violation);
  }
}

TEST_CASE("constants of the decoupled example") {
  const auto spec = decoupled_quartic(0.6, 1.2);
  const auto k = compute_constants(spec);
  CHECK(k.m == doctest::Approx(4 * (0.6 + 1.2) / 3).epsilon(1e-9));
  CHECK(k.point_a[0] == doctest::Approx(-1).epsilon(1e-6));
  CHECK(k.point_a[1] == doctest::Approx(-1).epsilon(1e-6));
  CHECK(k.mu == doctest::Approx(2 * (2 - 1.2)).epsilon(1e-6));
  CHECK(k.d > 0);
  CHECK(k.M >= 0);
  CHECK(eval_potential(spec, k.point_a) == doctest::Approx(-k.m).epsilon(1e-12));
}

TEST_CASE("scalar d from the quartic root") {
  for (double alpha : {0.4, 0.6, 1.0}) {
    const auto k = compute_constants(scalar_cubic(alpha));
    CHECK(k.d == doctest::Approx(oracle::distance_d(alpha)).epsilon(1e-8));
    CHECK(k.m == doctest::Approx(4 * alpha / 3).epsilon(1e-9));
    CHECK(k.mu == doctest::Approx(2 * (2 - alpha)).epsilon(1e-6));
  }
}

TEST_CASE("projection onto Gamma") {
  const auto s = scalar_cubic(0.6);
  const double root = oracle::gamma_root(0.6);
  SUBCASE("point on Gamma is fixed") {
    const P q = pt({root});
    const P r = project_to_gamma(s, q);
    CHECK(std::abs(r[0] - root) < 1e-12);
  }
  SUBCASE("scalar from 0") {
    const P r = project_to_gamma(s, pt({0}));
    CHECK(r[0] > -1);
    CHECK(r[0] < 0);
    CHECK(r[0] == doctest::Approx(root).epsilon(1e-9));
    CHECK(std::abs(eval_potential(s, r)) <= 1e-10);
  }
  SUBCASE("decoupled reduces to the scalar root") {
    const auto d = decoupled_quartic(0.6, 1.2);
    const P r = project_to_gamma(d, pt({0, 1}));
    CHECK(r[0] == doctest::Approx(root).epsilon(1e-9));
    CHECK(r[1] == doctest::Approx(1).epsilon(1e-12));
  }
  SUBCASE("critical point off Gamma is degenerate") {
    // W'(alpha/2) = 0 with W > 0 there
    try {
      project_to_gamma(s, pt({0.3}));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate_projection);
    }
  }
}

TEST_CASE("well depths order for alpha <= beta") {
  const auto d = decoupled_quartic(0.6, 1.2);
  const double a1 = eval_potential(d, pt({-1, 1}));
  const double a2 = eval_potential(d, pt({1, -1}));
  const double a3 = eval_potential(d, pt({-1, -1}));
  CHECK(0 > a1);
  CHECK(a1 >= a2);
  CHECK(a2 > a3);
}

TEST_CASE("user polynomial reproduces scalar_cubic") {
  const std::vector<Monomial<double>> terms{{0.5, {4}}, {-0.2, {3}}, {-1, {2}}, {0.6, {1}}, {0.1, {0}}};
  const auto u = user_polynomial(terms, pt({1}), default_box<double>(1));
  const auto s = scalar_cubic(0.6);
  for (double x = -2; x <= 2; x += 0.05) {
    CHECK(eval_potential(u, pt({x})) == doctest::Approx(eval_potential(s, pt({x}))).epsilon(1e-12));
    CHECK(eval_gradient(u, pt({x}))[0] == doctest::Approx(eval_gradient(s, pt({x}))[0]).epsilon(1e-12));
  }
  const auto k = compute_constants(u);
  CHECK(k.mu == doctest::Approx(2.8).epsilon(1e-5));
  CHECK(k.d == doctest::Approx(oracle::distance_d(0.6)).epsilon(1e-8));
}

TEST_CASE("potential without a negative region violates the assumption") {
  const std::vector<Monomial<double>> terms{{1, {2}}, {-2, {1}}, {1, {0}}};  // (s-1)^2
  const auto u = user_polynomial(terms, pt({1}), default_box<double>(1));
  try {
    compute_constants(u);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::assumption_violation);
  }
}

TEST_CASE("slowest mode of the decoupled example is the second component") {
  const auto [mu, v] = slowest_mode(decoupled_quartic(0.6, 1.2));
  CHECK(mu == doctest::Approx(1.6).epsilon(1e-6));
  CHECK(std::abs(v[1]) == doctest::Approx(1).epsilon(1e-9));
}
