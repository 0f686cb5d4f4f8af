#include "reslab/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "reslab/landscape.hpp"

namespace reslab {

namespace {

// first grid index (cyclic scan from 0) whose value satisfies pred
template <typename Pred>
int first_index(const EnergyProfile& e, const Pred& pred) {
  for (int j = 0; j < e.grid_size(); ++j)
    if (pred(e.values()[j])) return j;
  return -1;
}

// bisection of the first crossing of the interpolant below mu inside [lo, hi]
template <typename Pred>
double bisect_crossing(const EnergyProfile& e, double lo, double hi, const Pred& below) {
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (below(e(mid)))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 60) {
  const double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace

TransitionTimes transition_times(const EnergyProfile& e, double mu) {
  const double emin = e.min_value();
  const double emax = e.max_value();
  if (mu >= emax) return {0.0, 0.0};  // condition already holds at t = 0
  if (mu <= emin)
    throw ConfigError("mu <= inf e: the energy never falls to the available scale");
  if (e.values()[0] <= mu)
    throw ConfigError(
        "e(0) <= mu: the profile starts below the scale; shift the start time to the "
        "profile maximum");

  // first grid node at or below mu marks the first decreasing stretch crossing
  const int j = first_index(e, [&](double v) { return v <= mu; });
  const double hi = e.phase(j);
  const double lo = hi - 1.0 / e.grid_size();
  TransitionTimes out;
  out.a = bisect_crossing(e, lo, hi, [&](double v) { return v <= mu; });
  out.alpha = bisect_crossing(e, lo, hi, [&](double v) { return v < mu; });
  return out;
}

ResonanceInterval resonance_interval(const EnergyProfile& e_minus,
                                     const EnergyProfile& e_plus) {
  if (e_minus.grid_size() != e_plus.grid_size())
    throw ConfigError("resonance_interval requires profiles on the same phase grid");
  const int m = e_minus.grid_size();

  auto refined_min = [&](const std::function<double(double)>& f, int j_disc) {
    const double lo = static_cast<double>(j_disc - 1) / m;
    const double hi = static_cast<double>(j_disc + 1) / m;
    return f(golden_min(f, lo, hi));
  };

  auto fm = [&](double s) { return e_minus(s); };
  auto fp = [&](double s) { return e_plus(s); };
  auto fmax = [&](double s) { return std::max(e_minus(s), e_plus(s)); };

  const double lo_minus = refined_min(fm, e_minus.argmin_index());
  const double lo_plus = refined_min(fp, e_plus.argmin_index());

  int j_best = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j) {
    const double v = std::max(e_minus.values()[j], e_plus.values()[j]);
    if (v < best) {
      best = v;
      j_best = j;
    }
  }
  ResonanceInterval out;
  out.lower = std::max(lo_minus, lo_plus);
  out.upper = refined_min(fmax, j_best);
  out.empty = !(out.lower < out.upper);
  return out;
}

WindowSpec make_window(const EnergyProfile& e_basin, Basin basin, double mu, double h) {
  if (!(h > 0.0)) throw ConfigError("window half-width h must be positive");

  WindowSpec w;
  w.mu = mu;
  w.h = h;
  w.basin = basin;
  w.start_phase = 0.0;

  const EnergyProfile* prof = &e_basin;
  EnergyProfile shifted_storage;
  if (e_basin.values()[0] <= mu) {
    // start the experiment where the basin profile peaks (the diffusion is
    // started later, as the exit theory requires e_i(start) > mu)
    const int j0 = e_basin.argmax_index();
    shifted_storage = e_basin.shifted(j0);
    prof = &shifted_storage;
    w.start_phase = e_basin.phase(j0);
  }
  const TransitionTimes tt = transition_times(*prof, mu);
  w.a_abs = w.start_phase + tt.a;
  if (!(h < w.a_rel())) {
    std::ostringstream os;
    os << "window half-width h = " << h << " must be smaller than the transition time a_mu = "
       << tt.a << " (basin " << basin_name(basin) << ")";
    throw ConfigError(os.str());
  }
  return w;
}

double WindowEstimate::std_error() const {
  if (path_count <= 0) return 0.0;
  const double p = m_hat();
  return std::sqrt(std::max(0.0, p * (1.0 - p) / path_count));
}

WindowEstimate estimate_window_probability(const DriftField& field, const GeometrySpec& geom,
                                           const SimConfig& cfg, const WindowSpec& window,
                                           double rho, int workers) {
  if (cfg.path_count < 1) throw ConfigError("path_count must be >= 1 for a window estimate");
  cfg.validate(&field, &geom);
  const double te = cfg.time_scale();
  const double t_begin = window.t_begin(te);
  const double t_end = window.t_end(te);
  if (cfg.horizon > 0.0 && cfg.horizon < t_end)
    throw ConfigError("sim horizon ends before the transition window closes");

  // rho must keep the target balls inside their own basins
  for (Basin b : {Basin::minus, Basin::plus}) {
    const Vec& c = geom.equilibrium(b);
    for (int i = 0; i < field.dim(); ++i) {
      for (double sign : {-1.0, +1.0}) {
        Vec probe = c;
        probe[i] += sign * rho;
        const BasinLabel lbl = classify_attraction(field, geom, window.start_phase, probe);
        const BasinLabel want = (b == Basin::minus) ? BasinLabel::minus : BasinLabel::plus;
        if (lbl != want)
          throw ConfigError("rho is too large: B_rho(x_i) is not contained in its basin");
      }
    }
  }

  SimConfig run = cfg;
  run.horizon = (cfg.horizon > 0.0) ? cfg.horizon : t_end;
  run.horizon = std::min(run.horizon, t_end);  // after t_end the outcome is decided

  const Vec& start = geom.equilibrium(window.basin);
  const Vec& target = geom.equilibrium(opposite(window.basin));
  const double start_time = window.start_phase * te;

  std::vector<std::uint8_t> hit(cfg.path_count, 0), esc(cfg.path_count, 0);
  for_each_path(cfg.path_count, cfg.master_seed, workers, [&](long p, PathRng& rng) {
    const PathOutcome o = simulate_until(field, run, start, start_time, target, rho, rng, &geom);
    if (o.reason == StopReason::hit_target)
      hit[p] = (o.stop_time >= t_begin && o.stop_time <= t_end) ? 1 : 0;
    else if (o.reason == StopReason::escaped_r)
      esc[p] = 1;  // counted as a miss, recorded in the estimate metadata
  });

  WindowEstimate est;
  est.window = window;
  est.eps = cfg.eps;
  est.rho = rho;
  est.path_count = cfg.path_count;
  for (long p = 0; p < cfg.path_count; ++p) {
    est.hits += hit[p];
    est.escaped += esc[p];
  }
  return est;
}

WindowMeasure estimate_window_measure(const DriftField& field, const GeometrySpec& geom,
                                      const SimConfig& cfg, const EnergyProfile& e_minus,
                                      const EnergyProfile& e_plus, double mu, double h,
                                      double rho, int workers) {
  const WindowSpec wm = make_window(e_minus, Basin::minus, mu, h);
  const WindowSpec wp = make_window(e_plus, Basin::plus, mu, h);
  WindowMeasure out;
  out.minus_side = estimate_window_probability(field, geom, cfg, wm, rho, workers);
  // decorrelate the two ensembles while keeping reproducibility
  SimConfig cfg_plus = cfg;
  cfg_plus.master_seed = cfg.master_seed ^ 0x9e3779b97f4a7c15ull;
  out.plus_side = estimate_window_probability(field, geom, cfg_plus, wp, rho, workers);
  out.measure = std::min(out.minus_side.m_hat(), out.plus_side.m_hat());
  return out;
}

double predicted_rate(const EnergyProfile& e_minus, const EnergyProfile& e_plus, double mu,
                      double h) {
  double best = -std::numeric_limits<double>::infinity();
  for (Basin b : {Basin::minus, Basin::plus}) {
    const EnergyProfile& e = (b == Basin::minus) ? e_minus : e_plus;
    const WindowSpec w = make_window(e, b, mu, h);
    best = std::max(best, mu - e(w.a_abs - h));
  }
  return best;
}

RateFit fit_rate_points(std::vector<RatePoint> points, double predicted) {
  RateFit fit;
  fit.predicted = predicted;
  fit.points = std::move(points);

  double sw = 0.0, sx = 0.0, sy = 0.0;
  int usable = 0;
  for (auto& p : fit.points) {
    if (!(p.value > 0.0) || !(p.value < 1.0)) p.usable = false;
    if (!p.usable) continue;
    ++usable;
    const double x = 1.0 / p.eps;
    const double y = std::log1p(-p.value);
    sw += p.weight;
    sx += p.weight * x;
    sy += p.weight * y;
  }
  if (usable < 3)
    throw ConfigError("rate fit needs at least 3 usable ladder points (0 < M < 1)");
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : fit.points) {
    if (!p.usable) continue;
    const double x = 1.0 / p.eps;
    const double y = std::log1p(-p.value);
    sxx += p.weight * (x - xbar) * (x - xbar);
    sxy += p.weight * (x - xbar) * (y - ybar);
  }
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double rss = 0.0;
  for (const auto& p : fit.points) {
    if (!p.usable) continue;
    const double r = std::log1p(-p.value) - (fit.intercept + fit.slope / p.eps);
    rss += p.weight * r * r;
  }
  fit.residual = std::sqrt(rss / sw);
  return fit;
}

RateFit fit_rate(const DriftField& field, const GeometrySpec& geom, const SimConfig& cfg_template,
                 const EnergyProfile& e_minus, const EnergyProfile& e_plus, double mu, double h,
                 double rho, const std::vector<double>& eps_ladder, int workers) {
  for (std::size_t i = 1; i < eps_ladder.size(); ++i)
    if (!(eps_ladder[i] < eps_ladder[i - 1]))
      throw ConfigError("epsilon ladder must be strictly decreasing");

  std::vector<RatePoint> pts;
  pts.reserve(eps_ladder.size());
  for (double eps : eps_ladder) {
    SimConfig cfg = cfg_template;
    cfg.eps = eps;
    cfg.horizon = 0.0;  // derived from the window inside the estimator
    const WindowMeasure wm =
        estimate_window_measure(field, geom, cfg, e_minus, e_plus, mu, h, rho, workers);
    RatePoint p;
    p.eps = eps;
    p.value = wm.measure;
    const long n = cfg.path_count;
    // delta-method weight for log(1-M): Var = M / (n (1-M))
    p.weight = (p.value > 0.0 && p.value < 1.0) ? n * (1.0 - p.value) / p.value : 1.0;
    pts.push_back(p);
  }
  return fit_rate_points(std::move(pts), predicted_rate(e_minus, e_plus, mu, h));
}

ResonancePoint find_resonance_point(const EnergyProfile& e_minus, const EnergyProfile& e_plus,
                                    const std::vector<double>& h_ladder, int mu_grid) {
  ResonancePoint out;
  out.interval = resonance_interval(e_minus, e_plus);
  if (out.interval.empty) throw ConfigError("resonance interval is empty");
  std::string why;
  if (!check_profile_shape(e_minus, &why))
    throw ConfigError("profile e_- fails the shape check: " + why);
  if (!check_profile_shape(e_plus, &why))
    throw ConfigError("profile e_+ fails the shape check: " + why);

  const double lo = out.interval.lower;
  const double hi = out.interval.upper;
  const double grid_step = (hi - lo) / (mu_grid + 1);

  auto objective = [&](double mu, double h) -> double {
    const WindowSpec wm = make_window(e_minus, Basin::minus, mu, h);
    const WindowSpec wp = make_window(e_plus, Basin::plus, mu, h);
    return std::max(mu - e_minus(wm.a_abs - h), mu - e_plus(wp.a_abs - h));
  };

  std::vector<double> hs = h_ladder;
  std::sort(hs.begin(), hs.end(), std::greater<double>());

  for (double h : hs) {
    int best_j = -1;
    double best_v = std::numeric_limits<double>::infinity();
    std::vector<double> vals(mu_grid, std::numeric_limits<double>::quiet_NaN());
    for (int j = 0; j < mu_grid; ++j) {
      const double mu = lo + (j + 1) * grid_step;
      try {
        vals[j] = objective(mu, h);
      } catch (const ConfigError&) {
        continue;  // window invalid at this mu (h >= a_mu)
      }
      if (vals[j] < best_v) {
        best_v = vals[j];
        best_j = j;
      }
    }
    if (best_j < 0) throw ConfigError("no valid mu in the resonance interval for h");

    // golden-section refinement between the bracketing neighbours
    double mu_lo = lo + std::max(0, best_j) * grid_step;
    double mu_hi = lo + std::min(mu_grid + 1, best_j + 2) * grid_step;
    auto safe_obj = [&](double mu) {
      try {
        return objective(mu, h);
      } catch (const ConfigError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const double mu_star = golden_min(safe_obj, mu_lo, mu_hi);
    const bool at_boundary = (best_j == 0) || (best_j == mu_grid - 1);

    out.h_values.push_back(h);
    out.mu_r.push_back(mu_star);
    out.objective.push_back(safe_obj(mu_star));
    out.boundary.push_back(at_boundary);
  }

  // linear h -> 0 extrapolation from the two smallest h
  const std::size_t n = out.h_values.size();
  if (n >= 2) {
    const double h1 = out.h_values[n - 1], h2 = out.h_values[n - 2];
    const double m1 = out.mu_r[n - 1], m2 = out.mu_r[n - 2];
    out.extrapolated = m1 + (m1 - m2) * (0.0 - h1) / (h1 - h2);
  } else {
    out.extrapolated = out.mu_r.back();
  }
  out.boundary_flag = (out.extrapolated <= lo + grid_step) || (out.extrapolated >= hi - grid_step);

  out.inflection_found = find_inflection(e_minus, &out.inflection_phase, &out.inflection_value);
  return out;
}

}  // namespace reslab
