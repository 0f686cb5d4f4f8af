#include "reslab/action.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>

#include "reslab/ode.hpp"

namespace reslab {

PathGrid PathGrid::line(const Vec& x, const Vec& y, double horizon, int n_segments) {
  PathGrid g;
  g.horizon = horizon;
  g.dim = static_cast<int>(x.size());
  g.nodes.resize(static_cast<std::size_t>(n_segments + 1) * g.dim);
  for (int k = 0; k <= n_segments; ++k) {
    const double t = static_cast<double>(k) / n_segments;
    for (int i = 0; i < g.dim; ++i) g.nodes[k * g.dim + i] = (1.0 - t) * x[i] + t * y[i];
  }
  return g;
}

double evaluate_action(const DriftField& field, double s, const PathGrid& path) {
  const int d = path.dim;
  const int n = path.segments();
  const double dt = path.spacing();
  Vec mid(d), b(d);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double* p0 = path.node(k);
    const double* p1 = path.node(k + 1);
    for (int i = 0; i < d; ++i) mid[i] = 0.5 * (p0[i] + p1[i]);
    field.drift(s, mid.data(), b.data());
    for (int i = 0; i < d; ++i) {
      const double r = (p1[i] - p0[i]) / dt - b[i];
      acc += r * r;
    }
  }
  return 0.5 * dt * acc;
}

namespace {

void drift_jacobian(const DriftField& field, double s, const double* x, double* jac, Vec& xp,
                    Vec& xm, Vec& bp, Vec& bm) {
  if (field.jacobian(s, x, jac)) return;
  const int d = field.dim();
  const double h = 1e-6;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      xp[i] = x[i];
      xm[i] = x[i];
    }
    xp[j] += h;
    xm[j] -= h;
    field.drift(s, xp.data(), bp.data());
    field.drift(s, xm.data(), bm.data());
    for (int i = 0; i < d; ++i) jac[i * d + j] = (bp[i] - bm[i]) / (2.0 * h);
  }
}

}  // namespace

void action_gradient(const DriftField& field, double s, const PathGrid& path,
                     std::vector<double>& grad_interior) {
  const int d = path.dim;
  const int n = path.segments();
  const double dt = path.spacing();
  grad_interior.assign(static_cast<std::size_t>(n - 1) * d, 0.0);

  Vec mid(d), b(d), res(d), jtr(d), xp(d), xm(d), bp(d), bm(d);
  std::vector<double> jac(static_cast<std::size_t>(d) * d);

  // residual r_k = (p_{k+1} - p_k)/dt - b(s, m_k); contribution of segment k
  // to nodes k and k+1:
  //   d/dp_k   = -r_k - (dt/2) J(m_k)^T r_k
  //   d/dp_k+1 = +r_k - (dt/2) J(m_k)^T r_k
  for (int k = 0; k < n; ++k) {
    const double* p0 = path.node(k);
    const double* p1 = path.node(k + 1);
    for (int i = 0; i < d; ++i) mid[i] = 0.5 * (p0[i] + p1[i]);
    field.drift(s, mid.data(), b.data());
    for (int i = 0; i < d; ++i) res[i] = (p1[i] - p0[i]) / dt - b[i];
    drift_jacobian(field, s, mid.data(), jac.data(), xp, xm, bp, bm);
    for (int i = 0; i < d; ++i) {
      jtr[i] = 0.0;
      for (int j = 0; j < d; ++j) jtr[i] += jac[j * d + i] * res[j];
    }
    if (k >= 1) {
      double* g = grad_interior.data() + static_cast<std::size_t>(k - 1) * d;
      for (int i = 0; i < d; ++i) g[i] += -res[i] - 0.5 * dt * jtr[i];
    }
    if (k + 1 <= n - 1) {
      double* g = grad_interior.data() + static_cast<std::size_t>(k) * d;
      for (int i = 0; i < d; ++i) g[i] += res[i] - 0.5 * dt * jtr[i];
    }
  }
}

namespace {

struct LbfgsOutcome {
  double value;
  bool converged;
  int iterations;
};

// Limited-memory BFGS with Armijo backtracking on the stacked interior nodes.
LbfgsOutcome lbfgs_minimize_path(const DriftField& field, double s, PathGrid& path,
                                 const ActionOptions& opts) {
  const int d = path.dim;
  const int n_var = (path.segments() - 1) * d;
  if (n_var <= 0) return {evaluate_action(field, s, path), true, 0};

  auto pack = [&](std::vector<double>& v) {
    std::copy(path.nodes.begin() + d, path.nodes.end() - d, v.begin());
  };
  auto unpack = [&](const std::vector<double>& v) {
    std::copy(v.begin(), v.end(), path.nodes.begin() + d);
  };

  std::vector<double> x(n_var), g(n_var), x_new(n_var), g_new(n_var), dir(n_var);
  pack(x);
  double f = evaluate_action(field, s, path);
  action_gradient(field, s, path, g);

  const int mem = 8;
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  auto gmax = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double c : v) m = std::max(m, std::abs(c));
    return m;
  };

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (gmax(g) < opts.grad_tol) return {f, true, it};

    // two-loop recursion
    dir = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      double sa = 0.0;
      for (int j = 0; j < n_var; ++j) sa += s_hist[i][j] * dir[j];
      alpha[i] = rho_hist[i] * sa;
      for (int j = 0; j < n_var; ++j) dir[j] -= alpha[i] * y_hist[i][j];
    }
    if (!s_hist.empty()) {
      double sy = 0.0, yy = 0.0;
      const auto& sv = s_hist.back();
      const auto& yv = y_hist.back();
      for (int j = 0; j < n_var; ++j) {
        sy += sv[j] * yv[j];
        yy += yv[j] * yv[j];
      }
      const double gamma = sy / std::max(yy, 1e-300);
      for (double& c : dir) c *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      double yb = 0.0;
      for (int j = 0; j < n_var; ++j) yb += y_hist[i][j] * dir[j];
      const double beta = rho_hist[i] * yb;
      for (int j = 0; j < n_var; ++j) dir[j] += (alpha[i] - beta) * s_hist[i][j];
    }
    for (double& c : dir) c = -c;

    double g_dot_dir = 0.0;
    for (int j = 0; j < n_var; ++j) g_dot_dir += g[j] * dir[j];
    if (g_dot_dir >= 0.0) {  // not a descent direction: reset memory, use -g
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      g_dot_dir = 0.0;
      for (int j = 0; j < n_var; ++j) {
        dir[j] = -g[j];
        g_dot_dir -= g[j] * g[j];
      }
    }

    // Armijo backtracking
    double step = 1.0;
    bool accepted = false;
    double f_new = f;
    for (int ls = 0; ls < 40; ++ls) {
      for (int j = 0; j < n_var; ++j) x_new[j] = x[j] + step * dir[j];
      unpack(x_new);
      f_new = evaluate_action(field, s, path);
      if (f_new <= f + 1e-4 * step * g_dot_dir) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      unpack(x);
      return {f, gmax(g) < 10.0 * opts.grad_tol, it};
    }
    action_gradient(field, s, path, g_new);

    double sy = 0.0, ss = 0.0;
    std::vector<double> s_vec(n_var), y_vec(n_var);
    for (int j = 0; j < n_var; ++j) {
      s_vec[j] = x_new[j] - x[j];
      y_vec[j] = g_new[j] - g[j];
      sy += s_vec[j] * y_vec[j];
      ss += s_vec[j] * s_vec[j];
    }
    if (sy > 1e-12 * std::sqrt(ss) * std::sqrt(std::max(1e-300, dot(y_vec.data(), y_vec.data(), n_var)))) {
      s_hist.push_back(std::move(s_vec));
      y_hist.push_back(std::move(y_vec));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > mem) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
  }
  unpack(x);
  return {f, false, it};
}

// Downhill flow from y (nudged toward x) sampled densely; reversing it gives
// the canonical uphill initialization from x to y.
bool reversed_flow_init(const DriftField& field, double s, const Vec& x, const Vec& y,
                        double horizon, int n_segments, PathGrid& out) {
  const int d = field.dim();
  const double gap = dist(x, y);
  if (gap < 1e-12) return false;

  Vec start = y;
  const double nudge = std::max(1e-6, 1e-4 * gap);
  for (int i = 0; i < d; ++i) start[i] += nudge * (x[i] - y[i]) / gap;

  std::vector<double> times;
  std::vector<Vec> pts;
  times.push_back(0.0);
  pts.push_back(start);

  auto f = [&](const double* p, double* o) { field.drift(s, p, o); };
  auto on_step = [&](double t, const Vec& p) {
    times.push_back(t);
    pts.push_back(p);
    if (dist(p, x) < 1e-9 || t >= horizon) return OdeStop::done;
    return OdeStop::proceed;
  };
  OdeOptions ode;
  ode.h_max = horizon / 8.0;
  ode.max_steps = 200000;
  integrate_adaptive(f, start, on_step, ode);
  if (dist(pts.back(), x) > 0.05 * std::max(1.0, gap)) return false;  // flow missed x

  const double t_end = times.back();
  out.horizon = horizon;
  out.dim = d;
  out.nodes.assign(static_cast<std::size_t>(n_segments + 1) * d, 0.0);
  // grid time t maps to flow time t_end - (t - (horizon - t_end)), with the
  // initial stretch parked at x while the flow is still settling
  std::size_t cursor = 0;
  for (int k = 0; k <= n_segments; ++k) {
    const double t = horizon * k / n_segments;
    const double tf = t_end - (t - (horizon - t_end));
    double* node = out.node(k);
    if (tf >= t_end) {
      std::copy(x.begin(), x.end(), node);
      continue;
    }
    if (tf <= 0.0) {
      std::copy(y.begin(), y.end(), node);
      continue;
    }
    while (cursor + 1 < times.size() && times[cursor + 1] < tf) ++cursor;
    // linear interpolation between recorded flow samples (reversed in time)
    std::size_t lo = 0, hi = times.size() - 1;
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (times[mid] <= tf)
        lo = mid;
      else
        hi = mid;
    }
    const double w = (tf - times[lo]) / std::max(1e-300, times[hi] - times[lo]);
    for (int i = 0; i < d; ++i) node[i] = (1.0 - w) * pts[lo][i] + w * pts[hi][i];
  }
  // pin the endpoints exactly
  std::copy(x.begin(), x.end(), out.node(0));
  std::copy(y.begin(), y.end(), out.node(n_segments));
  return true;
}

PathGrid resample_onto(const PathGrid& src, double horizon, int n_segments, const Vec& x,
                       const Vec& y) {
  // previous optimum parked at the start point for the extra time
  PathGrid g;
  g.horizon = horizon;
  g.dim = src.dim;
  g.nodes.assign(static_cast<std::size_t>(n_segments + 1) * g.dim, 0.0);
  const double pad = horizon - src.horizon;
  for (int k = 0; k <= n_segments; ++k) {
    const double t = horizon * k / n_segments;
    double* node = g.node(k);
    if (t <= pad) {
      std::copy(x.begin(), x.end(), node);
      continue;
    }
    const double ts = t - pad;
    const double pos = ts / src.spacing();
    int j = std::min(static_cast<int>(pos), src.segments() - 1);
    const double w = pos - j;
    for (int i = 0; i < g.dim; ++i)
      node[i] = (1.0 - w) * src.node(j)[i] + w * src.node(j + 1)[i];
  }
  std::copy(x.begin(), x.end(), g.node(0));
  std::copy(y.begin(), y.end(), g.node(n_segments));
  return g;
}

}  // namespace

CostResult minimize_cost(const DriftField& field, double s, const Vec& x, const Vec& y,
                         double horizon, int n_segments, const ActionOptions& opts) {
  if (!(horizon > 0.0)) throw ConfigError("minimize_cost requires a positive horizon");
  if (n_segments < 16) throw ConfigError("minimize_cost requires at least 16 segments");

  std::vector<PathGrid> starts;
  starts.push_back(PathGrid::line(x, y, horizon, n_segments));
  PathGrid rev;
  if (reversed_flow_init(field, s, x, y, horizon, n_segments, rev))
    starts.push_back(std::move(rev));

  CostResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (auto& start : starts) {
    PathGrid path = start;
    const LbfgsOutcome out = lbfgs_minimize_path(field, s, path, opts);
    if (out.value < best.value) {
      best.value = out.value;
      best.converged = out.converged;
      best.iterations = out.iterations;
      best.path = std::move(path);
    }
  }
  if (best.value < 0.0 && best.value > -1e-10) best.value = 0.0;  // nonnegativity clip
  return best;
}

double default_ladder_start(const DriftField& field, double s, const Vec& x) {
  const int d = field.dim();
  std::vector<double> jac(static_cast<std::size_t>(d) * d);
  Vec xp(d), xm(d), bp(d), bm(d);
  drift_jacobian(field, s, x.data(), jac.data(), xp, xm, bp, bm);
  // slowest contraction rate = smallest |real eigenvalue part|; d <= 2 closed form
  double rate;
  if (d == 1) {
    rate = std::abs(jac[0]);
  } else if (d == 2) {
    const double tr = jac[0] + jac[3];
    const double det = jac[0] * jac[3] - jac[1] * jac[2];
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      rate = std::min(std::abs(tr / 2.0 - r), std::abs(tr / 2.0 + r));
    } else {
      rate = std::abs(tr / 2.0);
    }
  } else {
    // diagonal estimate is enough for a ladder start
    rate = std::abs(jac[0]);
    for (int i = 1; i < d; ++i) rate = std::min(rate, std::abs(jac[i * d + i]));
  }
  rate = std::max(rate, 1e-3);
  return 5.0 / rate;
}

QpResult quasi_potential(const DriftField& field, double s, const Vec& x, const Vec& y,
                         const ActionOptions& opts) {
  QpResult res;
  if (dist(x, y) < 1e-12) {
    res.value = 0.0;
    res.converged = true;
    res.best_horizon = 0.0;
    return res;
  }

  const double t0 = opts.t0 > 0.0 ? opts.t0 : default_ladder_start(field, s, x);
  std::vector<double> ladder;
  for (double t = t0; t <= opts.t_max * (1.0 + 1e-12); t *= 2.0) ladder.push_back(t);
  if (ladder.empty() || ladder.back() < opts.t_max * 0.999) ladder.push_back(opts.t_max);

  double prev_value = std::numeric_limits<double>::infinity();
  res.value = std::numeric_limits<double>::infinity();
  bool last_rung_settled = false;
  bool last_rung_converged = false;
  const PathGrid* warm = nullptr;
  PathGrid warm_storage;

  for (std::size_t r = 0; r < ladder.size(); ++r) {
    const double T = ladder[r];
    const int n = std::max(opts.min_nodes, static_cast<int>(std::ceil(opts.nodes_per_time * T)));

    CostResult rung = minimize_cost(field, s, x, y, T, n, opts);
    if (warm != nullptr) {
      PathGrid warm_path = resample_onto(*warm, T, n, x, y);
      const LbfgsOutcome out = lbfgs_minimize_path(field, s, warm_path, opts);
      if (out.value < rung.value) {
        rung.value = std::max(out.value, 0.0);
        rung.converged = out.converged;
        rung.path = std::move(warm_path);
      }
    }

    if (rung.value < res.value) {
      res.value = rung.value;
      res.best_horizon = T;
      res.path = rung.path;
    }
    last_rung_settled =
        std::abs(rung.value - prev_value) <= opts.ladder_rel_tol * std::max(1e-12, std::abs(rung.value));
    last_rung_converged = rung.converged;
    prev_value = rung.value;
    warm_storage = std::move(rung.path);
    warm = &warm_storage;
  }
  res.converged = last_rung_settled && last_rung_converged;
  if (res.value < 0.0 && res.value > -1e-10) res.value = 0.0;
  return res;
}

namespace {

// Compass search over the separatrix tangent coordinates.
template <typename Objective>
Vec hyperplane_descent(const GeometrySpec& geom, const Objective& objective, int budget,
                       double initial_step, double* best_value) {
  const Vec origin = geom.separatrix_point();
  const std::vector<Vec> basis = geom.tangent_basis();
  const int m = static_cast<int>(basis.size());
  const int d = static_cast<int>(origin.size());

  Vec zeta(m, 0.0);
  auto point_of = [&](const Vec& z) {
    Vec p = origin;
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < d; ++i) p[i] += z[a] * basis[a][i];
    return p;
  };

  double f0 = objective(point_of(zeta));
  int evals = 1;
  double step = initial_step;
  while (m > 0 && step > 1e-4 && evals < budget) {
    bool improved = false;
    for (int a = 0; a < m && evals < budget; ++a) {
      for (double sign : {+1.0, -1.0}) {
        Vec z = zeta;
        z[a] += sign * step;
        const double f = objective(point_of(z));
        ++evals;
        if (f < f0 - 1e-12) {
          f0 = f;
          zeta = z;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  if (best_value) *best_value = f0;
  return point_of(zeta);
}

}  // namespace

double well_depth(const DriftField& field, const GeometrySpec& geom, double s, Basin basin,
                  const ActionOptions& opts) {
  if (!field.has_potential()) throw ConfigError("well_depth requires a gradient field");
  if (!geom.separatrix) throw ConfigError("well_depth requires an explicit separatrix");
  double u_chi = 0.0;
  hyperplane_descent(
      geom, [&](const Vec& p) { return field.potential(s, p.data()); },
      std::max(200, opts.hyperplane_budget * 4), 0.25 * geom.equilibrium_gap(), &u_chi);
  return u_chi - field.potential(s, geom.equilibrium(basin).data());
}

EnergyProfile energy_profile(const DriftField& field, const GeometrySpec& geom, Basin basin,
                             int grid_size, const ActionOptions& opts) {
  if (!geom.separatrix) throw ConfigError("energy_profile requires an explicit separatrix");
  const Vec& x0 = geom.equilibrium(basin);

  std::vector<double> values(grid_size, 0.0);
  std::vector<std::uint8_t> flags(grid_size, 0);
  for (int j = 0; j < grid_size; ++j) {
    const double s = static_cast<double>(j) / grid_size;
    bool converged = true;
    auto objective = [&](const Vec& y) {
      const QpResult q = quasi_potential(field, s, x0, y, opts);
      converged = converged && q.converged;
      return q.value;
    };
    double best = 0.0;
    hyperplane_descent(geom, objective, opts.hyperplane_budget,
                       0.2 * geom.equilibrium_gap(), &best);
    values[j] = best;
    flags[j] = converged ? 0 : 1;
  }
  return EnergyProfile(std::move(values), std::move(flags));
}

}  // namespace reslab
