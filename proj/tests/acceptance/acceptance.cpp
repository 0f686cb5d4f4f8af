// Acceptance suite: one pass/fail line per criterion, each at its stated
// tolerance. Criteria can be selected with --criterion N; the exit code is
// the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "reslab/action.hpp"
#include "reslab/chain.hpp"
#include "reslab/landscape.hpp"
#include "reslab/resonance.hpp"
#include "reslab/rng.hpp"
#include "reslab/sde.hpp"

using namespace reslab;

namespace {

int g_workers = 2;

Benchmark sinus_bench(int d) {
  return make_benchmark(
      d, [](double t) { return 0.5 + 0.25 * std::cos(2.0 * M_PI * t); }, 0.5);
}

double depth_minus(double t) { return 0.5 + 0.25 * std::cos(2.0 * M_PI * t); }

EnergyProfile analytic_minus(int m) {
  return EnergyProfile::from_function([](double t) { return 2.0 * depth_minus(t); }, m);
}

EnergyProfile analytic_plus(int m) {
  return EnergyProfile::from_function([](double t) { return 2.0 * depth_minus(t + 0.5); }, m);
}

// computed profiles shared across criteria within one process
struct ComputedProfiles {
  EnergyProfile minus;
  EnergyProfile plus;
};

const ComputedProfiles& computed_profiles() {
  static const ComputedProfiles p = [] {
    const Benchmark b = sinus_bench(1);
    return ComputedProfiles{energy_profile(*b.field, b.geometry, Basin::minus, 16),
                            energy_profile(*b.field, b.geometry, Basin::plus, 16)};
  }();
  return p;
}

struct Criterion {
  int id;
  const char* title;
  std::function<bool(std::string&)> run;
};

bool criterion1(std::string& detail) {
  const ComputedProfiles& p = computed_profiles();
  double worst = 0.0;
  for (int j = 0; j < 16; ++j) {
    const double target = 2.0 * depth_minus(p.minus.phase(j));
    worst = std::max(worst, std::abs(p.minus.values()[j] - target) / target);
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |e - 2D| / 2D = %.5f (tolerance 0.03)", worst);
  detail = buf;
  return worst <= 0.03 && !p.minus.any_flagged();
}

bool criterion2(std::string& detail) {
  const Benchmark b1 = sinus_bench(1);
  const Benchmark b2 = sinus_bench(2);
  const double v1 = quasi_potential(*b1.field, 0.0, {-1.0}, {0.0}).value;
  const double v2 = quasi_potential(*b2.field, 0.0, {-1.0, 0.0}, {0.0, 0.0}).value;
  const double rel = std::abs(v2 - v1) / v1;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "V_1d = %.5f, V_2d = %.5f, rel diff = %.5f (tolerance 0.03)",
                v1, v2, rel);
  detail = buf;
  return rel <= 0.03;
}

bool criterion3(std::string& detail) {
  const EnergyProfile e = analytic_minus(16);
  const double grid_step = 1.0 / 16;
  double worst = 0.0;
  for (double mu : {0.75, 0.9, 1.0 - 1e-9}) {
    const double a = transition_times(e, mu).a;
    const double exact = std::acos(2.0 * (mu - 1.0)) / (2.0 * M_PI);
    worst = std::max(worst, std::abs(a - exact));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |a_mu - arccos form| = %.6f (tolerance %.4f)", worst,
                grid_step);
  detail = buf;
  return worst <= grid_step;
}

bool criterion4(std::string& detail) {
  const ComputedProfiles& p = computed_profiles();
  const ResonanceInterval ir = resonance_interval(p.minus, p.plus);
  const double grid_step = 1.0 / 16;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "I_R = (%.5f, %.5f), target (0.5, 1.0) +- %.4f", ir.lower,
                ir.upper, grid_step);
  detail = buf;
  return !ir.empty && std::abs(ir.lower - 0.5) <= grid_step &&
         std::abs(ir.upper - 1.0) <= grid_step;
}

bool criterion5(std::string& detail) {
  const ResonancePoint rp =
      find_resonance_point(analytic_minus(64), analytic_plus(64), {0.2, 0.15, 0.1, 0.05});
  double worst = 0.0;
  for (std::size_t i = 0; i < rp.h_values.size(); ++i) {
    const double h = rp.h_values[i];
    if (h != 0.05 && h != 0.1 && h != 0.2) continue;
    const double target = 1.0 - 0.5 * std::sin(M_PI * h);
    worst = std::max(worst, std::abs(rp.mu_r[i] - target) / target);
  }
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "max rel err of mu_R(h) vs 1 - sin(pi h)/2 = %.5f (tol 0.01); boundary flag %s",
                worst, rp.boundary_flag ? "raised" : "missing");
  detail = buf;
  return worst <= 0.01 && rp.boundary_flag;
}

bool criterion6(std::string& detail) {
  const EnergyProfile cm = EnergyProfile::from_function([](double) { return 1.0; }, 64);
  const std::vector<ChainSpec> specs = {
      ChainSpec{analytic_minus(64), analytic_plus(64), 0.5, 0.25, 0.9},
      ChainSpec{analytic_minus(64), analytic_plus(64), 0.5, 0.15, 0.8},
      ChainSpec{cm, cm, 0.0, 0.5, 1.0}};
  double worst = 0.0;
  for (const ChainSpec& spec : specs) {
    const TransitionDensity d = first_transition_density(spec, Basin::minus);
    // identity: tabulated window mass over [0, H] vs 1 - exp(-int_0^H rate)
    double cum = 0.0;
    for (std::size_t k = 1; k < d.time.size(); ++k)
      cum += 0.5 * d.step * (d.rate[k - 1] + d.rate[k]);
    const double lhs = d.mass_between(0.0, d.time.back(), spec.time_scale());
    worst = std::max(worst, std::abs(lhs - (1.0 - std::exp(-cum))));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |mass - (1 - exp(-int rate))| = %.2e (tolerance 1e-8)",
                worst);
  detail = buf;
  return worst <= 1e-8;
}

RateFit chain_ladder_fit(const EnergyProfile& em, const EnergyProfile& ep, double mu, double h,
                         const std::vector<double>& ladder) {
  const double lag = detect_phase_lag(em, ep);
  std::vector<RatePoint> pts;
  for (double eps : ladder) {
    const ChainSpec cs{em, ep, lag, eps, mu};
    RatePoint p;
    p.eps = eps;
    p.value = chain_window_measure(cs, h).measure;
    pts.push_back(p);
  }
  return fit_rate_points(std::move(pts), predicted_rate(em, ep, mu, h));
}

bool criterion7(std::string& detail) {
  const ComputedProfiles& p = computed_profiles();
  const RateFit fit = chain_ladder_fit(p.minus, p.plus, 0.9, 0.1, {0.25, 0.2, 0.15, 0.12});
  const double rel = std::abs(fit.slope - fit.predicted) / std::abs(fit.predicted);
  // context: the identical fit deep in the asymptotic regime, where the
  // late-window miss is no longer the dominant term of 1 - N
  const RateFit deep = chain_ladder_fit(p.minus, p.plus, 0.9, 0.1, {0.03, 0.025, 0.02, 0.015});
  const double rel_deep = std::abs(deep.slope - deep.predicted) / std::abs(deep.predicted);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "fit %.4f vs predicted %.4f: rel err %.2f (tol 0.15); same fit for eps in "
                "[0.015, 0.03]: rel err %.2f",
                fit.slope, fit.predicted, rel, rel_deep);
  detail = buf;
  return rel <= 0.15;
}

bool criterion8(std::string& detail) {
  const ComputedProfiles& p = computed_profiles();
  const Benchmark b = sinus_bench(1);
  SimConfig cfg;
  cfg.eps = 0.25;
  cfg.mu = 0.9;
  cfg.dt = 1e-3;
  cfg.path_count = 2000;
  cfg.master_seed = 20240809;
  const WindowMeasure wm = estimate_window_measure(*b.field, b.geometry, cfg, p.minus, p.plus,
                                                   0.9, 0.1, 0.2, g_workers);
  const ChainSpec cs{p.minus, p.plus, detect_phase_lag(p.minus, p.plus), 0.25, 0.9};
  const ChainWindowMeasure cw = chain_window_measure(cs, 0.1);
  const double se = std::max(wm.minus_side.std_error(), wm.plus_side.std_error());
  const double gap = std::abs(wm.measure - cw.measure);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "diffusion M = %.4f, chain N = %.4f, gap = %.4f = %.1f se (allowed 4 se)",
                wm.measure, cw.measure, gap, gap / se);
  detail = buf;
  return gap <= 4.0 * se;
}

bool criterion9(std::string& detail) {
  const ComputedProfiles& p = computed_profiles();
  const Benchmark b = sinus_bench(1);
  SimConfig cfg;
  cfg.eps = 0.3;
  cfg.mu = 0.9;
  cfg.dt = 1e-3;
  cfg.path_count = 2000;
  cfg.master_seed = 424242;
  const RateFit fit = fit_rate(*b.field, b.geometry, cfg, p.minus, p.plus, 0.9, 0.1, 0.2,
                               {0.3, 0.25, 0.2}, g_workers);
  const double rel = std::abs(fit.slope - fit.predicted) / std::abs(fit.predicted);
  char buf[192];
  std::snprintf(buf, sizeof(buf), "fit %.4f vs predicted %.4f: rel err %.2f (tolerance 0.25)",
                fit.slope, fit.predicted, rel);
  detail = buf;
  return rel <= 0.25;
}

bool criterion10(std::string& detail) {
  const Benchmark b = sinus_bench(1);
  SimConfig cfg;
  cfg.eps = 0.3;
  cfg.mu = 0.9;
  cfg.dt = 1e-3;
  cfg.path_count = 1000;
  cfg.master_seed = 1001;
  double prev = 1.0;
  bool monotone = true;
  double at5 = -1.0;
  std::string vals;
  for (double radius : {3.0, 4.0, 5.0}) {
    const EscapeEstimate e =
        estimate_escape_probability(*b.field, cfg, {-1.0}, radius, 100.0, g_workers);
    monotone = monotone && e.p_hat <= prev;
    prev = e.p_hat;
    at5 = e.p_hat;
    vals += " R=" + std::to_string(static_cast<int>(radius)) + ":" + std::to_string(e.escapes);
  }
  detail = "escape counts per 1000 paths:" + vals;
  return monotone && at5 == 0.0;
}

bool criterion11(std::string& detail) {
  const Benchmark b = sinus_bench(1);
  std::string failures;

  {  // action nonnegativity on randomized fixtures
    PathRng rng(2025, 0);
    for (int trial = 0; trial < 25; ++trial) {
      PathGrid path = PathGrid::line({-1.0}, {0.7}, 4.0, 48);
      for (int k = 1; k < 48; ++k) path.node(k)[0] += 0.4 * rng.next_gaussian();
      if (evaluate_action(*b.field, rng.next_uniform(), path) < 0.0) {
        failures += " nonnegativity";
        break;
      }
    }
  }
  {  // triangle inequality of the cost
    const double v_xy = minimize_cost(*b.field, 0.1, {-1.0}, {0.2}, 20.0, 200).value;
    const double v_xz = minimize_cost(*b.field, 0.1, {-1.0}, {-0.4}, 10.0, 100).value;
    const double v_zy = minimize_cost(*b.field, 0.1, {-0.4}, {0.2}, 10.0, 100).value;
    if (!(v_xy <= v_xz + v_zy + 1e-3)) failures += " triangle";
  }
  {  // local Lipschitz bound with the sampled constant
    const double radius = 2.0;
    double k_r = 0.0, kappa_r = 0.0, b00 = 0.0;
    Vec out(1), out2(1);
    for (double x = -radius; x <= radius; x += 0.02) {
      Vec xp{x + 1e-5}, xm{x - 1e-5}, bp(1), bm(1);
      b.field->drift(0.0, xp.data(), bp.data());
      b.field->drift(0.0, xm.data(), bm.data());
      k_r = std::max(k_r, std::abs(bp[0] - bm[0]) / 2e-5);
      Vec pt{x};
      b.field->drift(0.1, pt.data(), out.data());
      b.field->drift(0.1 + 1e-5, pt.data(), out2.data());
      kappa_r = std::max(kappa_r, std::abs(out2[0] - out[0]) / 1e-5);
    }
    Vec zero{0.0};
    b.field->drift(0.0, zero.data(), out.data());
    b00 = std::abs(out[0]);
    const double gamma = 0.5 * std::pow(1.0 + kappa_r + radius * k_r + b00, 2.0);
    for (const auto& [x0, y0] : {std::pair{-1.0, -0.8}, {-0.6, -0.5}, {0.4, 0.55}}) {
      const double v = quasi_potential(*b.field, 0.3, {x0}, {y0}).value;
      if (!(v <= gamma * std::abs(y0 - x0))) {
        failures += " lipschitz";
        break;
      }
    }
  }
  {  // window nesting and worker-count reproducibility
    const EnergyProfile em = analytic_minus(64);
    SimConfig cfg;
    cfg.eps = 0.3;
    cfg.mu = 0.9;
    cfg.dt = 1e-3;
    cfg.path_count = 400;
    cfg.master_seed = 11011;
    const WindowSpec w1 = make_window(em, Basin::minus, 0.9, 0.05);
    const WindowSpec w2 = make_window(em, Basin::minus, 0.9, 0.1);
    const WindowEstimate e1 =
        estimate_window_probability(*b.field, b.geometry, cfg, w1, 0.2, g_workers);
    const WindowEstimate e2 =
        estimate_window_probability(*b.field, b.geometry, cfg, w2, 0.2, g_workers);
    if (!(e2.hits >= e1.hits)) failures += " nesting";
    const WindowEstimate r1 = estimate_window_probability(*b.field, b.geometry, cfg, w2, 0.2, 1);
    const WindowEstimate r2 = estimate_window_probability(*b.field, b.geometry, cfg, w2, 0.2, 2);
    if (r1.hits != r2.hits) failures += " reproducibility";
  }

  detail = failures.empty() ? "nonneg, triangle, Lipschitz, nesting, reproducibility all hold"
                            : "failed:" + failures;
  return failures.empty();
}

}  // namespace

int main(int argc, char** argv) {
  int selected = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) selected = std::atoi(argv[++i]);
    if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc) g_workers = std::atoi(argv[++i]);
  }
  if (g_workers <= 0) g_workers = std::max(1u, std::thread::hardware_concurrency());

  const std::vector<Criterion> criteria = {
      {1, "energy profile matches twice the well depth (3%)", criterion1},
      {2, "d=2 quasi-potential reduces to the d=1 value (3%)", criterion2},
      {3, "transition times match the arccos closed form", criterion3},
      {4, "resonance interval is (0.5, 1.0) within a grid step", criterion4},
      {5, "resonance point follows 1 - sin(pi h)/2 with boundary flag", criterion5},
      {6, "chain window mass identity at quadrature precision", criterion6},
      {7, "chain rate fit reproduces the predicted exponent (15%)", criterion7},
      {8, "diffusion window probability agrees with the chain (4 se)", criterion8},
      {9, "diffusion rate slope matches the profile prediction (25%)", criterion9},
      {10, "escape fraction is monotone in R and zero at R=5", criterion10},
      {11, "property suite (nonneg, triangle, Lipschitz, nesting, seeds)", criterion11},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (selected != 0 && c.id != selected) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %2d: %s — %s\n", ok ? "PASS" : "FAIL", c.id, c.title,
                detail.c_str());
    std::fflush(stdout);
    failures += !ok;
  }
  return failures;
}
