#include <doctest.h>

#include <cmath>

#include "reslab/action.hpp"
#include "reslab/rng.hpp"
#include "test_util.hpp"

using namespace reslab;
using testutil::rk4_flow;

namespace {

// trimmed options keep the unit suite fast; accuracy stays well inside the
// asserted tolerances (the spec-scale ladder runs in the acceptance suite)
ActionOptions fast_opts() {
  ActionOptions o;
  o.t_max = 80.0;
  return o;
}

}  // namespace

TEST_SUITE("action") {

TEST_CASE("straight line against zero drift costs v^2 T / 2") {
  const testutil::ZeroField f(1);
  const PathGrid line = PathGrid::line({0.0}, {1.0}, 1.0, 100);
  CHECK(evaluate_action(f, 0.0, line) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("the frozen flow has (quadrature-only) zero action") {
  const Benchmark b = testutil::static_benchmark(1, 0.5);
  auto frozen = [&](const double* x, double* o) { b.field->drift(0.0, x, o); };
  const double T = 10.0;
  const int n = 1000;
  PathGrid path;
  path.horizon = T;
  path.dim = 1;
  path.nodes.resize(n + 1);
  Vec x{0.5};
  path.nodes[0] = x[0];
  for (int k = 1; k <= n; ++k) {
    x = rk4_flow(frozen, x, T / n, 1e-3);
    path.nodes[k] = x[0];
  }
  CHECK(evaluate_action(*b.field, 0.0, path) <= 1e-4);
}

TEST_CASE("time-reversed downhill flow costs twice the energy drop") {
  // static well of depth 0.5: reversed flow from the saddle to the minimum
  // has action 2 (U(0) - U(-1)) = 1
  const Benchmark b = testutil::static_benchmark(1, 0.5);
  auto frozen = [&](const double* x, double* o) { b.field->drift(0.0, x, o); };
  const double T = 40.0;
  const int n = 400;
  // downhill samples from just left of the saddle
  std::vector<double> flow(n + 1);
  Vec x{-1e-6};
  flow[0] = x[0];
  for (int k = 1; k <= n; ++k) {
    x = rk4_flow(frozen, x, T / n, 1e-4);
    flow[k] = x[0];
  }
  PathGrid path;
  path.horizon = T;
  path.dim = 1;
  path.nodes.resize(n + 1);
  for (int k = 0; k <= n; ++k) path.nodes[k] = flow[n - k];
  path.nodes[0] = -1.0;  // pin the endpoints
  path.nodes[n] = 0.0;
  const double a = evaluate_action(*b.field, 0.0, path);
  CHECK(a >= 0.98);
  CHECK(a <= 1.02);
}

TEST_CASE("analytic gradient matches finite differences") {
  const Benchmark b = testutil::sinusoidal_benchmark(2);
  PathGrid path = PathGrid::line({-1.0, 0.0}, {0.0, 0.0}, 5.0, 20);
  // bend the path a little so the gradient is generic
  for (int k = 1; k < 20; ++k) path.node(k)[1] += 0.05 * std::sin(0.7 * k);

  std::vector<double> grad;
  action_gradient(*b.field, 0.3, path, grad);
  const double h = 1e-6;
  for (int k = 1; k < 20; k += 4) {
    for (int i = 0; i < 2; ++i) {
      PathGrid pp = path, pm = path;
      pp.node(k)[i] += h;
      pm.node(k)[i] -= h;
      const double fd =
          (evaluate_action(*b.field, 0.3, pp) - evaluate_action(*b.field, 0.3, pm)) / (2 * h);
      CHECK(grad[(k - 1) * 2 + i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("minimize_cost: coincident endpoints cost nothing") {
  const Benchmark b = testutil::static_benchmark(1, 0.5);
  const CostResult r = minimize_cost(*b.field, 0.0, {-1.0}, {-1.0}, 10.0, 100);
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(r.converged);
}

TEST_CASE("minimize_cost: downhill from the saddle is nearly free") {
  const Benchmark b = testutil::static_benchmark(1, 0.5);
  const CostResult r = minimize_cost(*b.field, 0.0, {0.0}, {-1.0}, 40.0, 400);
  CHECK(r.value <= 1e-2);
}

TEST_CASE("minimize_cost: uphill to the saddle costs twice the depth") {
  const Benchmark b = testutil::static_benchmark(1, 0.5);
  const CostResult r = minimize_cost(*b.field, 0.0, {-1.0}, {0.0}, 40.0, 400);
  CHECK(r.value >= 0.97);
  CHECK(r.value <= 1.03);
}

TEST_CASE("quasi-potential at a point vanishes") {
  const Benchmark b = testutil::static_benchmark(1, 0.5);
  const QpResult q = quasi_potential(*b.field, 0.0, {-1.0}, {-1.0}, fast_opts());
  CHECK(q.value == doctest::Approx(0.0));
  CHECK(q.converged);
}

TEST_CASE("quasi-potential equals twice the barrier at phase 0") {
  const Benchmark b = testutil::sinusoidal_benchmark(1);  // D_-(0) = 0.75
  const QpResult q = quasi_potential(*b.field, 0.0, {-1.0}, {0.0}, fast_opts());
  CHECK(q.value >= 1.5 * 0.98);
  CHECK(q.value <= 1.5 * 1.02);
}

TEST_CASE("the d=2 quasi-potential reduces to the d=1 value") {
  const ActionOptions o = fast_opts();
  const Benchmark b1 = testutil::sinusoidal_benchmark(1);
  const Benchmark b2 = testutil::sinusoidal_benchmark(2);
  const double v1 = quasi_potential(*b1.field, 0.0, {-1.0}, {0.0}, o).value;
  const double v2 = quasi_potential(*b2.field, 0.0, {-1.0, 0.0}, {0.0, 0.0}, o).value;
  CHECK(std::abs(v2 - v1) / v1 <= 0.03);
}

TEST_CASE("well depth recovers the construction depths") {
  const Benchmark b = testutil::sinusoidal_benchmark(1);
  CHECK(well_depth(*b.field, b.geometry, 0.0, Basin::minus) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(well_depth(*b.field, b.geometry, 0.5, Basin::minus) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(well_depth(*b.field, b.geometry, 0.0, Basin::plus) == doctest::Approx(0.25).epsilon(1e-9));
  const testutil::ZeroField zf(1);
  CHECK_THROWS_AS(well_depth(zf, b.geometry, 0.0, Basin::minus), ConfigError);
}

TEST_CASE("well depth minimizes over the separatrix in d=2") {
  const Benchmark b = testutil::sinusoidal_benchmark(2);
  CHECK(well_depth(*b.field, b.geometry, 0.0, Basin::minus) == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("energy profile obeys the twice-depth identity") {
  const Benchmark b = testutil::sinusoidal_benchmark(1);
  const EnergyProfile e = energy_profile(*b.field, b.geometry, Basin::minus, 8, fast_opts());
  CHECK_FALSE(e.any_flagged());
  for (int j = 0; j < 8; ++j) {
    const double target = 2.0 * b.depth(e.phase(j), Basin::minus);
    CHECK(std::abs(e.values()[j] - target) / target <= 0.03);
  }
}

TEST_CASE("static landscape yields a constant profile") {
  const Benchmark b = testutil::static_benchmark(1, 0.5);
  const EnergyProfile e = energy_profile(*b.field, b.geometry, Basin::minus, 8, fast_opts());
  for (int j = 0; j < 8; ++j) CHECK(std::abs(e.values()[j] - 1.0) <= 0.01);
}

TEST_CASE("actions and quasi-potentials are nonnegative on random paths") {
  const Benchmark b = testutil::sinusoidal_benchmark(1);
  PathRng rng(99, 0);
  for (int trial = 0; trial < 20; ++trial) {
    PathGrid path = PathGrid::line({-1.0}, {0.5}, 5.0, 64);
    for (int k = 1; k < 64; ++k) path.node(k)[0] += 0.3 * rng.next_gaussian();
    CHECK(evaluate_action(*b.field, rng.next_uniform(), path) >= 0.0);
  }
}

TEST_CASE("cost obeys the triangle inequality on sampled triples") {
  const Benchmark b = testutil::static_benchmark(1, 0.5);
  const double t = 10.0, u = 10.0;
  const Vec x{-1.0}, z{-0.4}, y{0.2};
  const double v_xy = minimize_cost(*b.field, 0.0, x, y, t + u, 200).value;
  const double v_xz = minimize_cost(*b.field, 0.0, x, z, t, 100).value;
  const double v_zy = minimize_cost(*b.field, 0.0, z, y, u, 100).value;
  CHECK(v_xy <= v_xz + v_zy + 1e-3);
}

TEST_CASE("discrete action is additive under concatenation") {
  const Benchmark b = testutil::sinusoidal_benchmark(1);
  PathRng rng(5, 1);
  PathGrid full = PathGrid::line({-1.0}, {1.0}, 8.0, 80);
  for (int k = 1; k < 80; ++k) full.node(k)[0] += 0.2 * rng.next_gaussian();

  PathGrid a, c;
  a.horizon = 3.0;
  a.dim = 1;
  a.nodes.assign(full.nodes.begin(), full.nodes.begin() + 31);
  c.horizon = 5.0;
  c.dim = 1;
  c.nodes.assign(full.nodes.begin() + 30, full.nodes.end());

  const double whole = evaluate_action(*b.field, 0.2, full);
  const double parts = evaluate_action(*b.field, 0.2, a) + evaluate_action(*b.field, 0.2, c);
  CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
}

TEST_CASE("quasi-potential is locally Lipschitz with the sampled constant") {
  const Benchmark b = testutil::static_benchmark(1, 0.5);
  const double R = 2.0;
  // sampled drift bounds on B_R(0)
  double k_r = 0.0, b00 = 0.0;
  {
    Vec out(1);
    for (double x = -R; x <= R; x += 0.05) {
      Vec jac(1), xp{x + 1e-5}, xm{x - 1e-5}, bp(1), bm(1);
      b.field->drift(0.0, xp.data(), bp.data());
      b.field->drift(0.0, xm.data(), bm.data());
      k_r = std::max(k_r, std::abs(bp[0] - bm[0]) / 2e-5);
    }
    Vec zero{0.0};
    b.field->drift(0.0, zero.data(), out.data());
    b00 = std::abs(out[0]);
  }
  const double kappa_r = 0.0;  // static field: no time dependence
  const double gamma = 0.5 * std::pow(1.0 + kappa_r + R * k_r + b00, 2.0);

  const ActionOptions o = fast_opts();
  for (const auto& [x0, y0] : {std::pair{-1.0, -0.9}, {-0.7, -0.55}, {0.3, 0.4}}) {
    const double v = quasi_potential(*b.field, 0.0, {x0}, {y0}, o).value;
    CHECK(v <= gamma * std::abs(y0 - x0));
  }
}

TEST_CASE("profile values vary smoothly with the phase") {
  const Benchmark b = testutil::sinusoidal_benchmark(1);
  const ActionOptions o = fast_opts();
  // adjacent phases: |e(s+ds) - e(s)| <= C ds with C fitted from the closed
  // form (|e'| <= pi, plus optimizer tolerance headroom)
  const double ds = 1.0 / 32;
  const double e1 = quasi_potential(*b.field, 0.25, {-1.0}, {0.0}, o).value;
  const double e2 = quasi_potential(*b.field, 0.25 + ds, {-1.0}, {0.0}, o).value;
  CHECK(std::abs(e2 - e1) <= (M_PI + 1.0) * ds);
}

}  // TEST_SUITE
