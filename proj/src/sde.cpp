#include "reslab/sde.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

namespace reslab {

double SimConfig::time_scale() const {
  if (eps <= 0.0) return std::numeric_limits<double>::infinity();
  return std::exp(mu / eps);
}

void SimConfig::validate(const DriftField* field, const GeometrySpec* geom) const {
  if (eps < 0.0) throw ConfigError("sim.epsilon must be >= 0");
  if (!(mu > 0.0)) throw ConfigError("sim.mu must be > 0");
  if (!(dt > 0.0)) throw ConfigError("sim.dt must be > 0");
  if (path_count < 0) throw ConfigError("sim.path_count must be >= 0");
  if (horizon < 0.0) throw ConfigError("sim.horizon must be >= 0");
  if (horizon > 0.0 && horizon / dt > 4e9)
    throw ConfigError("sim.horizon / sim.dt exceeds the per-path step budget");
  if (field != nullptr) {
    const double ra = resolved_r_abort(*field, geom);
    double needed = field->r0();
    if (geom != nullptr)
      needed = std::max({needed, norm(geom->x_minus), norm(geom->x_plus)});
    if (!(ra > needed))
      throw ConfigError("sim.r_abort must exceed max(|x_pm|, R0)");
  }
}

double SimConfig::effective_dt(const DriftField& field, const GeometrySpec* geom) const {
  // sampled Lipschitz bound near the equilibria (diagonal Jacobian estimate)
  double lip = 1.0;
  const int d = field.dim();
  std::vector<Vec> probes;
  if (geom != nullptr) {
    probes.push_back(geom->x_minus);
    probes.push_back(geom->x_plus);
  } else {
    probes.push_back(Vec(d, 0.0));
  }
  Vec xp(d), xm(d), bp(d), bm(d);
  for (const Vec& p : probes) {
    for (int sphase = 0; sphase < 4; ++sphase) {
      const double s = sphase / 4.0;
      for (int i = 0; i < d; ++i) {
        xp = p;
        xm = p;
        xp[i] += 1e-4;
        xm[i] -= 1e-4;
        field.drift(s, xp.data(), bp.data());
        field.drift(s, xm.data(), bm.data());
        lip = std::max(lip, std::abs(bp[i] - bm[i]) / 2e-4);
      }
    }
  }
  return std::min(dt, 0.1 / lip);
}

double SimConfig::resolved_r_abort(const DriftField& field, const GeometrySpec* geom) const {
  if (r_abort > 0.0) return r_abort;
  double base = field.r0();
  if (geom != nullptr) base = std::max({base, norm(geom->x_minus), norm(geom->x_plus)});
  return 2.0 * base;
}

namespace {

// smallest theta in [0,1] with |p0 + theta (p1-p0) - c| = rho
double ball_crossing(const double* p0, const double* p1, const double* c, double rho, int d) {
  double a = 0.0, b = 0.0, q = 0.0;
  for (int i = 0; i < d; ++i) {
    const double u = p1[i] - p0[i];
    const double w = p0[i] - c[i];
    a += u * u;
    b += 2.0 * u * w;
    q += w * w;
  }
  q -= rho * rho;
  if (a <= 0.0) return 1.0;
  const double disc = b * b - 4.0 * a * q;
  if (disc < 0.0) return 1.0;
  const double root = (-b - std::sqrt(disc)) / (2.0 * a);
  return std::clamp(root, 0.0, 1.0);
}

}  // namespace

PathOutcome simulate_until(const DriftField& field, const SimConfig& cfg, const Vec& start,
                           double start_time, const Vec& target, double rho, PathRng& rng,
                           const GeometrySpec* geom) {
  const int d = field.dim();
  const double te = cfg.time_scale();
  const double dt = cfg.effective_dt(field, geom);
  const double noise = std::sqrt(cfg.eps * dt);
  const double r_abort = cfg.resolved_r_abort(field, geom);
  const double r_abort_sq = r_abort * r_abort;
  const double rho_sq = rho * rho;

  PathOutcome out;
  out.final_point = start;

  auto finish = [&](StopReason reason, double t_abs, const Vec& x) {
    out.reason = reason;
    out.stop_time = std::min(t_abs, cfg.horizon);
    out.phase_at_stop = std::isinf(te) ? 0.0 : out.stop_time / te;
    out.final_point = x;
    return out;
  };

  Vec x = start, x_prev(d), b(d);
  {  // immediate hit
    double dsq = 0.0;
    for (int i = 0; i < d; ++i) dsq += (x[i] - target[i]) * (x[i] - target[i]);
    if (dsq <= rho_sq) return finish(StopReason::hit_target, start_time, x);
  }

  double t = start_time;
  while (t < cfg.horizon) {
    const double step = std::min(dt, cfg.horizon - t);
    const double s = std::isinf(te) ? 0.0 : t / te;
    field.drift(s, x.data(), b.data());
    x_prev = x;
    if (cfg.eps > 0.0) {
      const double sigma = (step == dt) ? noise : std::sqrt(cfg.eps * step);
      for (int i = 0; i < d; ++i) x[i] += b[i] * step + sigma * rng.next_gaussian();
    } else {
      for (int i = 0; i < d; ++i) x[i] += b[i] * step;
    }
    t += step;

    double dsq = 0.0, nsq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double dx = x[i] - target[i];
      dsq += dx * dx;
      nsq += x[i] * x[i];
    }
    if (!std::isfinite(dsq) || !std::isfinite(nsq))
      throw NumericError("state became non-finite; dt is too large for this field");
    if (dsq <= rho_sq) {
      const double theta = ball_crossing(x_prev.data(), x.data(), target.data(), rho, d);
      return finish(StopReason::hit_target, t - step + theta * step, x);
    }
    if (nsq >= r_abort_sq) {
      Vec origin(d, 0.0);
      const double theta = ball_crossing(x_prev.data(), x.data(), origin.data(), r_abort, d);
      return finish(StopReason::escaped_r, t - step + theta * step, x);
    }
  }
  return finish(StopReason::horizon, cfg.horizon, x);
}

void for_each_path(long n_paths, std::uint64_t master_seed, int workers,
                   const std::function<void(long, PathRng&)>& fn) {
  if (n_paths <= 0) return;
  workers = std::max(1, workers);
  if (workers == 1) {
    for (long p = 0; p < n_paths; ++p) {
      PathRng rng(master_seed, static_cast<std::uint64_t>(p));
      fn(p, rng);
    }
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<bool> failed{false};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const long p = next.fetch_add(1);
        if (p >= n_paths || failed.load(std::memory_order_relaxed)) break;
        try {
          PathRng rng(master_seed, static_cast<std::uint64_t>(p));
          fn(p, rng);
        } catch (...) {
          failed.store(true);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load()) throw NumericError("a simulation path failed");
}

EscapeEstimate estimate_escape_probability(const DriftField& field, const SimConfig& cfg,
                                           const Vec& start, double radius, double deadline,
                                           int workers) {
  if (cfg.path_count < 1) throw ConfigError("path_count must be >= 1 for an estimate");
  if (!(norm(start) <= radius / 2.0))
    throw ConfigError("escape estimate requires |start| <= R/2");

  SimConfig run = cfg;
  run.horizon = deadline;
  run.r_abort = radius;  // exit from B_R(0) is exactly the ESCAPED_R stop
  const int d = field.dim();
  // unreachable target keeps simulate_until on the escape/horizon branch
  Vec target(d, 0.0);
  target[0] = 4.0 * radius;

  std::vector<std::uint8_t> escaped(cfg.path_count, 0);
  for_each_path(cfg.path_count, cfg.master_seed, workers, [&](long p, PathRng& rng) {
    if (deadline <= 0.0) return;
    const PathOutcome o = simulate_until(field, run, start, 0.0, target, 1e-12, rng);
    escaped[p] = (o.reason == StopReason::escaped_r) ? 1 : 0;
  });

  EscapeEstimate est;
  est.paths = cfg.path_count;
  for (std::uint8_t e : escaped) est.escapes += e;
  est.p_hat = static_cast<double>(est.escapes) / est.paths;
  est.std_error = std::sqrt(std::max(0.0, est.p_hat * (1.0 - est.p_hat) / est.paths));
  return est;
}

}  // namespace reslab
