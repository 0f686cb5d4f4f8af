#include <doctest.h>

#include <cmath>

#include "reslab/chain.hpp"
#include "test_util.hpp"

using namespace reslab;

namespace {

EnergyProfile sinus_profile(int m = 64) {
  return EnergyProfile::from_function(
      [](double t) { return 1.0 + 0.5 * std::cos(2.0 * M_PI * t); }, m);
}

EnergyProfile sinus_profile_lagged(int m = 64) {
  return EnergyProfile::from_function(
      [](double t) { return 1.0 - 0.5 * std::cos(2.0 * M_PI * t); }, m);
}

EnergyProfile const_profile(double level = 1.0, int m = 64) {
  return EnergyProfile::from_function([level](double) { return level; }, m);
}

ChainSpec benchmark_chain(double eps, double mu) {
  return ChainSpec{sinus_profile(), sinus_profile_lagged(), 0.5, eps, mu};
}

// independent Simpson cumulative rate for cross-checks
double simpson_cum_rate(const EnergyProfile& e, double eps, double mu, double t_end_phase,
                        int n = 200001) {
  const double te = std::exp(mu / eps);
  double acc = 0.0;
  const double hstep = t_end_phase / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double u = i * hstep;
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * std::exp(-e(u) / eps);
  }
  return te * acc * hstep / 3.0;
}

}  // namespace

TEST_SUITE("chain") {

TEST_CASE("constant energy gives a constant rate") {
  const ChainSpec spec{const_profile(1.0), const_profile(1.0), 0.0, 0.5, 1.0};
  for (double t : {0.0, 1.0, 3.7, 100.0})
    CHECK(chain_rate(spec, Basin::minus, t) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("rates are periodic with period Te") {
  const ChainSpec spec = benchmark_chain(0.25, 0.9);
  const double te = spec.time_scale();
  for (double t : {0.0, 0.3 * te, 0.71 * te})
    CHECK(chain_rate(spec, Basin::minus, t) ==
          doctest::Approx(chain_rate(spec, Basin::minus, t + te)).epsilon(1e-9));
}

TEST_CASE("the fastest channel runs at the profile minimum") {
  const EnergyProfile e = sinus_profile();
  const ChainSpec spec{e, sinus_profile_lagged(), 0.5, 0.05, 0.9};
  double max_rate = 0.0;
  for (double t = 0.0; t < 1.0; t += 1e-3)
    max_rate = std::max(max_rate, chain_rate(spec, Basin::minus, t * spec.time_scale()));
  CHECK(max_rate <= std::exp(-e.min_value() / 0.05) * (1.0 + 1e-9));
  CHECK(max_rate >= std::exp(-e.min_value() / 0.05) * 0.999);
}

TEST_CASE("constant-rate density is the exponential law") {
  // e == 1, eps = 0.5: lambda = exp(-2); run 11 periods so the mass target
  // 1 - exp(-10) is inside the truncation horizon
  const ChainSpec spec{const_profile(1.0), const_profile(1.0), 0.0, 0.5, 1.0};
  const double lambda = std::exp(-2.0);
  DensityOptions opts;
  opts.horizon_periods = 11.0;
  opts.mass_cutoff = 1e-9;
  const TransitionDensity d = first_transition_density(spec, Basin::minus, opts);
  for (std::size_t k = 0; k < d.time.size(); k += 5000) {
    CHECK(d.density[k] ==
          doctest::Approx(lambda * std::exp(-lambda * d.time[k])).epsilon(1e-6));
  }
  const double h10 = 10.0 / lambda;
  REQUIRE(d.time.back() >= h10);
  CHECK(d.mass_between(0.0, h10, spec.time_scale()) >= 1.0 - std::exp(-10.0) - 1e-9);
}

TEST_CASE("tabulated mass equals the cumulative-rate pushforward exactly") {
  for (const ChainSpec& spec :
       {benchmark_chain(0.25, 0.9), benchmark_chain(0.15, 0.8),
        ChainSpec{const_profile(1.0), const_profile(1.0), 0.0, 0.5, 1.0}}) {
    const TransitionDensity d = first_transition_density(spec, Basin::minus);
    const double h_end = d.time.back();
    const double mass = d.mass_between(0.0, h_end, spec.time_scale());
    CHECK(std::abs(mass - (1.0 - std::exp(-d.cum_rate.back()))) <= 1e-8);
    CHECK(std::abs(d.total_mass - mass) <= 1e-12);
  }
}

TEST_CASE("trapezoid cumulative rate agrees with an independent Simpson rule") {
  const ChainSpec spec = benchmark_chain(0.25, 0.9);
  const TransitionDensity d = first_transition_density(spec, Basin::minus);
  const double t_phase = 0.5;
  const double lam_trap = d.cum_rate_at(t_phase * spec.time_scale());
  const double lam_simp = simpson_cum_rate(spec.e_minus, 0.25, 0.9, t_phase);
  CHECK(lam_trap == doctest::Approx(lam_simp).epsilon(1e-5));
}

TEST_CASE("density is nonnegative with a nondecreasing cumulative") {
  const ChainSpec spec = benchmark_chain(0.2, 0.9);
  const TransitionDensity d = first_transition_density(spec, Basin::minus);
  for (std::size_t k = 1; k < d.time.size(); k += 97) {
    CHECK(d.density[k] >= 0.0);
    CHECK(d.cum_rate[k] >= d.cum_rate[k - 1]);
  }
  CHECK(d.total_mass <= 1.0);
}

TEST_CASE("grids coarser than Te/1e4 are rejected") {
  const ChainSpec spec = benchmark_chain(0.25, 0.9);
  DensityOptions opts;
  opts.nodes_per_period = 5000;
  CHECK_THROWS_AS(first_transition_density(spec, Basin::minus, opts), ConfigError);
}

TEST_CASE("window measure: degenerate windows and full coverage") {
  const ChainSpec spec = benchmark_chain(0.08, 0.9);
  const TransitionDensity d = first_transition_density(spec, Basin::minus);
  // zero-width window carries no mass
  CHECK(d.mass_between(5.0, 5.0, spec.time_scale()) == 0.0);
  // a window covering essentially the whole support carries the total mass
  const ChainWindowMeasure wide = chain_window_measure(spec, 0.25);
  CHECK(wide.measure >= 0.95 * d.total_mass);
}

TEST_CASE("phase-lag symmetry: both states carry the same window mass") {
  const ChainSpec spec = benchmark_chain(0.25, 0.9);
  const ChainWindowMeasure wm = chain_window_measure(spec, 0.1);
  CHECK(wm.mass_minus == doctest::Approx(wm.mass_plus).epsilon(1e-7));
  CHECK(wm.measure <= wm.mass_minus + 1e-15);
  // frozen from the independent quadrature probe at these parameters
  CHECK(wm.measure == doctest::Approx(0.209830).epsilon(2e-3));
}

TEST_CASE("both model limits evaluate to the same number") {
  const EnergyProfile em = sinus_profile();
  const EnergyProfile ep = sinus_profile_lagged();
  const CompareReport rep =
      compare_resonance(em, ep, 0.25, {0.7, 0.8, 0.9}, 0.1, {0.25, 0.2, 0.15, 0.12});
  for (const CompareRow& r : rep.rows)
    CHECK(r.predicted_diffusion == doctest::Approx(r.predicted_chain).epsilon(1e-9));
}

TEST_CASE("chain rate fit approaches the theorem limit for small eps") {
  // quadrature ladder deep in the asymptotic regime; at desk-scale eps the
  // late-window miss still dominates and the fit is far from the limit
  const EnergyProfile em = sinus_profile(256);
  const EnergyProfile ep = sinus_profile_lagged(256);
  std::vector<RatePoint> pts;
  for (double eps : {0.03, 0.025, 0.02, 0.015}) {
    const ChainSpec cs{em, ep, 0.5, eps, 0.9};
    RatePoint p;
    p.eps = eps;
    p.value = chain_window_measure(cs, 0.1).measure;
    pts.push_back(p);
  }
  const double predicted = predicted_rate(em, ep, 0.9, 0.1);
  const RateFit fit = fit_rate_points(pts, predicted);
  CHECK(std::abs(fit.slope - predicted) / std::abs(predicted) <= 0.15);
}

TEST_CASE("chain simulation matches its own density") {
  const ChainSpec spec = benchmark_chain(0.25, 0.9);
  const double te = spec.time_scale();
  const ChainWindowMeasure wm = chain_window_measure(spec, 0.1);
  const long n = 100000;
  const ChainSample sample = simulate_chain(spec, Basin::minus, 31337, n);
  const double t1 = wm.window_minus.t_begin(te), t2 = wm.window_minus.t_end(te);
  long hits = 0;
  for (double t : sample.times) hits += (t >= t1 && t <= t2);
  const double frac = static_cast<double>(hits) / n;
  const double se = std::sqrt(wm.mass_minus * (1.0 - wm.mass_minus) / n);
  CHECK(std::abs(frac - wm.mass_minus) <= 3.0 * se);
}

TEST_CASE("constant-rate chain has the exponential mean") {
  const ChainSpec spec{const_profile(1.0), const_profile(1.0), 0.0, 0.5, 1.0};
  const double lambda = std::exp(-2.0);
  DensityOptions opts;
  opts.horizon_periods = 14.0;
  opts.mass_cutoff = 1e-9;
  const long n = 10000;
  const ChainSample s = simulate_chain(spec, Basin::minus, 99, n, opts);
  double mean = 0.0;
  for (double t : s.times) mean += t;
  mean /= static_cast<double>(s.times.size());
  const double se = (1.0 / lambda) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(mean - 1.0 / lambda) <= 4.0 * se);
}

TEST_CASE("chain samples are seed-reproducible") {
  const ChainSpec spec = benchmark_chain(0.25, 0.9);
  const ChainSample a = simulate_chain(spec, Basin::minus, 123, 500);
  const ChainSample b = simulate_chain(spec, Basin::minus, 123, 500);
  const ChainSample c = simulate_chain(spec, Basin::minus, 124, 500);
  REQUIRE(a.times.size() == b.times.size());
  CHECK(a.times == b.times);
  CHECK(a.times != c.times);
}

TEST_CASE("compare: chain and profile argmins agree on the benchmark grid") {
  const EnergyProfile em = sinus_profile();
  const EnergyProfile ep = sinus_profile_lagged();
  std::vector<double> mus;
  for (int i = 1; i <= 21; ++i) mus.push_back(0.5 + i * 0.5 / 22.0);
  const CompareReport rep = compare_resonance(em, ep, 0.25, mus, 0.1, {0.25, 0.2, 0.15, 0.12});
  CHECK(rep.argmin_predicted == rep.argmin_chain_predicted);
  CHECK(rep.pass);
}

TEST_CASE("compare: degenerate single-mu grid passes trivially") {
  const CompareReport rep = compare_resonance(sinus_profile(), sinus_profile_lagged(), 0.25,
                                              {0.9}, 0.1, {0.25, 0.2, 0.15, 0.12});
  CHECK(rep.pass);
  CHECK(rep.rows.size() == 1);
}

TEST_CASE("profile CSV interchange round-trips") {
  const EnergyProfile em = sinus_profile(32);
  const EnergyProfile ep = sinus_profile_lagged(32);
  const std::string path = "/tmp/reslab_profiles_roundtrip.csv";
  write_profiles_csv(path, "# test", em, ep);
  const ProfilePair back = read_profiles_csv(path);
  REQUIRE(back.minus.grid_size() == 32);
  for (int j = 0; j < 32; ++j) {
    CHECK(back.minus.values()[j] == em.values()[j]);  // round-trip formatting is exact
    CHECK(back.plus.values()[j] == ep.values()[j]);
  }
  CHECK_THROWS_AS(read_profiles_csv("/tmp/reslab_no_such_file.csv"), ConfigError);
}

TEST_CASE("phase-lock validation and lag detection") {
  const EnergyProfile em = sinus_profile();
  const EnergyProfile ep = sinus_profile_lagged();
  CHECK(detect_phase_lag(em, ep) == doctest::Approx(0.5));
  ChainSpec good{em, ep, 0.5, 0.25, 0.9};
  CHECK_NOTHROW(good.validate(1e-9));
  ChainSpec bad{em, sinus_profile(), 0.5, 0.25, 0.9};  // not a shifted copy
  CHECK_THROWS_AS(bad.validate(1e-3), ConfigError);
}

}  // TEST_SUITE
