#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "wave/minimize.hpp"
#include "wave/speed.hpp"

using namespace wave;

namespace {

struct Fixture {
  PotentialSpec<double> spec = scalar_cubic(0.6);
  PotentialConstants<double> k = compute_constants(spec);
  Grid<double> grid = default_grid(spec, k, 0.01);
  Profile<double> init = initial_profile(spec, k, grid);
};

}  // namespace

TEST_CASE("minimizer at the exact speed is the tanh wave") {
  Fixture f;
  const auto r = minimize_profile(f.spec, f.k, 0.6, f.init);
  CHECK(r.converged);
  CHECK(std::abs(r.gamma) <= 2e-3);
  const double x0 = std::atanh(oracle::gamma_root(0.6));
  const double gap = oracle::aligned_linf(r.profile, [&](double x) {
    return Point<double>::Constant(1, std::tanh(x + x0));
  });
  CHECK(gap <= 1e-2);
  CHECK(std::abs(f.spec.eval_W(r.profile.at(f.grid.zero_index()))) <= 1e-10);
  CHECK(r.feasibility_violation <= 1e-8);
}

TEST_CASE("sign of gamma below and above the speed") {
  Fixture f;
  const auto lo = minimize_profile(f.spec, f.k, 0.3, f.init);
  const auto hi = minimize_profile(f.spec, f.k, 1.0, f.init);
  CHECK(lo.gamma < 0);
  CHECK(hi.gamma > 0);
  for (const auto* r : {&lo, &hi}) {
    CHECK(r->gamma >= r->bounds.lower - 1e-3);
    CHECK(r->gamma <= r->bounds.upper + 1e-3);
  }
}

TEST_CASE("objective never increases across iterations") {
  Fixture f;
  MinimizeOptions o;
  o.restarts = 0;
  o.trace_every = 1;
  std::vector<double> obj;
  o.trace = [&](long, double value, double) { obj.push_back(value); };
  minimize_profile(f.spec, f.k, 0.45, f.init, o);
  REQUIRE(obj.size() > 2);
  // equality up to roundoff once the objective reaches its noise floor
  for (std::size_t i = 1; i < obj.size(); ++i) CHECK(obj[i] <= obj[i - 1] + 1e-13 * std::abs(obj[i - 1]));
}

TEST_CASE("gamma curve is increasing with one sign change and Lipschitz") {
  Fixture f;
  const std::vector<double> cs{0.3, 0.45, 0.6, 0.8, 1.0};
  const auto curve = gamma_curve(f.spec, f.k, f.grid, cs);
  std::vector<double> g;
  for (const auto& pt : curve) {
    REQUIRE(pt.result.has_value());
    g.push_back(pt.result->gamma);
  }
  int changes = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] > g[i - 1]);
    if ((g[i] > 0) != (g[i - 1] > 0)) {
      ++changes;
      CHECK(cs[i - 1] >= 0.45);
      CHECK(cs[i] <= 0.8);
    }
    // gamma(a) - gamma(c) <= ((a-c)/(2c-a))(gamma(c) + m/c) + ((a-c)/(ac)) m, for c < a < 2c
    const double c = cs[i - 1], a = cs[i], m = f.k.m;
    const double bound = (a - c) / (2 * c - a) * (g[i - 1] + m / c) + (a - c) / (a * c) * m;
    CHECK(g[i] - g[i - 1] <= 1.1 * bound);
  }
  CHECK(changes == 1);
}

TEST_CASE("warm and cold starts agree") {
  Fixture f;
  const auto near = minimize_profile(f.spec, f.k, 0.55, f.init);
  const auto warm = minimize_profile(f.spec, f.k, 0.6, near.profile);
  const auto cold = minimize_profile(f.spec, f.k, 0.6, f.init);
  CHECK(std::abs(warm.gamma - cold.gamma) <= 5e-3);
  CHECK(cold.multistart_spread <= 1e-4);
}

TEST_CASE("left tail of minimizers settles") {
  Fixture f;
  for (double c : {0.3, 0.6, 1.0}) {
    const auto r = minimize_profile(f.spec, f.k, c, f.init);
    const auto& p = r.profile;
    const Eigen::Index z = p.grid.zero_index();
    const double x_cut = p.grid.x_left() + 0.2 * (p.grid.x_right() - p.grid.x_left());
    double wmin = 1e300, wmin_left = 1e300;
    for (Eigen::Index i = 0; i <= z; ++i) {
      const double w = f.spec.eval_W(p.at(i));
      wmin = std::min(wmin, w);
      if (p.grid[i] <= x_cut) wmin_left = std::min(wmin_left, w);
    }
    CHECK(wmin_left - wmin <= 1e-2);
    CHECK(f.spec.eval_W(p.at(0)) - wmin <= 1e-2);
    const auto d = derivative(p);
    CHECK(f.spec.eval_grad(p.at(0)).norm() + d.col(0).norm() <= 1e-2);
  }
}

TEST_CASE("invalid options are contract violations") {
  Fixture f;
  MinimizeOptions o;
  o.shrink = 1.5;
  CHECK_THROWS_AS(minimize_profile(f.spec, f.k, 0.6, f.init, o), Error);
  o = MinimizeOptions{};
  o.opt_tol = 0;
  CHECK_THROWS_AS(minimize_profile(f.spec, f.k, 0.6, f.init, o), Error);
  CHECK_THROWS_AS(minimize_profile(f.spec, f.k, -0.6, f.init), Error);
}

TEST_CASE("max_iters cap flags non-convergence") {
  Fixture f;
  MinimizeOptions o;
  o.max_iters = 3;
  o.restarts = 0;
  const auto r = minimize_profile(f.spec, f.k, 0.45, f.init, o);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
}
