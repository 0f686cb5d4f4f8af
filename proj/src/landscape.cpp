#include "reslab/landscape.hpp"

#include <cmath>
#include <sstream>

#include "reslab/ode.hpp"

namespace reslab {

std::vector<Vec> GeometrySpec::tangent_basis() const {
  if (!separatrix) return {};
  const int d = static_cast<int>(separatrix->normal.size());
  std::vector<Vec> basis;
  // Gram-Schmidt of the coordinate axes against the normal.
  for (int axis = 0; axis < d && static_cast<int>(basis.size()) < d - 1; ++axis) {
    Vec v(d, 0.0);
    v[axis] = 1.0;
    const double vn = dot(v.data(), separatrix->normal.data(), d);
    for (int i = 0; i < d; ++i) v[i] -= vn * separatrix->normal[i];
    for (const Vec& b : basis) {
      const double vb = dot(v.data(), b.data(), d);
      for (int i = 0; i < d; ++i) v[i] -= vb * b[i];
    }
    const double n = norm(v);
    if (n < 1e-10) continue;
    for (double& c : v) c /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

Vec GeometrySpec::separatrix_point() const {
  if (!separatrix) throw ConfigError("geometry has no explicit separatrix");
  const int d = static_cast<int>(separatrix->normal.size());
  Vec p(d, 0.0);
  for (int i = 0; i < d; ++i) p[i] = separatrix->offset * separatrix->normal[i];
  return p;
}

namespace {

class BenchmarkField final : public DriftField {
 public:
  BenchmarkField(int dim, DepthFn depth_minus, double lag)
      : dim_(dim), depth_minus_(std::move(depth_minus)), lag_(lag) {
    eta_ = 1.0;
    r0_ = 3.0;
  }

  int dim() const override { return dim_; }

  // phase reduced mod 1 so periodicity holds exactly on dyadic sample grids
  double depth(double s, double x1) const {
    double u = s - std::floor(s);
    if (x1 > 0.0) {
      u += lag_;
      if (u >= 1.0) u -= 1.0;
    }
    return depth_minus_(u);
  }

  void drift(double s, const double* x, double* out) const override {
    const double d = depth(s, x[0]);
    out[0] = -4.0 * d * (x[0] * x[0] * x[0] - x[0]);
    for (int k = 1; k < dim_; ++k) out[k] = -x[k];
  }

  bool has_potential() const override { return true; }

  double potential(double s, const double* x) const override {
    const double d = depth(s, x[0]);
    const double x1sq = x[0] * x[0];
    double u = 4.0 * d * (x1sq * x1sq / 4.0 - x1sq / 2.0);
    for (int k = 1; k < dim_; ++k) u += 0.5 * x[k] * x[k];
    return u;
  }

  bool jacobian(double s, const double* x, double* out) const override {
    const double d = depth(s, x[0]);
    for (int i = 0; i < dim_ * dim_; ++i) out[i] = 0.0;
    out[0] = -4.0 * d * (3.0 * x[0] * x[0] - 1.0);
    for (int k = 1; k < dim_; ++k) out[k * dim_ + k] = -1.0;
    return true;
  }

 private:
  int dim_;
  DepthFn depth_minus_;
  double lag_;
};

}  // namespace

Benchmark make_benchmark(int dim, DepthFn depth_minus, double phase_lag) {
  if (dim != 1 && dim != 2) throw ConfigError("benchmark dimension must be 1 or 2");
  if (!(phase_lag > 0.0 && phase_lag < 1.0))
    throw ConfigError("benchmark phase lag must lie in (0, 1)");
  for (int j = 0; j < 64; ++j) {
    const double s = j / 64.0;
    if (!(depth_minus(s) > 0.0))
      throw ConfigError("benchmark depth function must be positive (fails at phase " +
                        std::to_string(s) + ")");
  }

  Benchmark b;
  b.phase_lag = phase_lag;
  b.depth_minus = depth_minus;
  b.field = std::make_shared<BenchmarkField>(dim, std::move(depth_minus), phase_lag);
  b.geometry.x_minus = Vec(dim, 0.0);
  b.geometry.x_plus = Vec(dim, 0.0);
  b.geometry.x_minus[0] = -1.0;
  b.geometry.x_plus[0] = 1.0;
  Hyperplane chi;
  chi.normal = Vec(dim, 0.0);
  chi.normal[0] = 1.0;
  chi.offset = 0.0;
  b.geometry.separatrix = chi;

  const double margin = inward_drift_margin(*b.field);
  if (!(margin < 0.0)) {
    std::ostringstream os;
    os << "benchmark violates the inward-drift condition (worst sampled margin " << margin
       << ")";
    throw NumericError(os.str());
  }
  return b;
}

double inward_drift_margin(const DriftField& field, int phase_samples, int direction_samples,
                           int radius_samples) {
  const int d = field.dim();
  Vec x(d), b(d);
  double worst = -1e300;
  for (int ip = 0; ip < phase_samples; ++ip) {
    const double s = static_cast<double>(ip) / phase_samples;
    for (int ir = 0; ir <= radius_samples; ++ir) {
      const double r =
          field.r0() * (1.0 + static_cast<double>(ir) / std::max(1, radius_samples));
      for (int id = 0; id < direction_samples; ++id) {
        // deterministic directions: for d=1 just +-1, otherwise a circle sweep
        if (d == 1) {
          if (id > 1) break;
          x[0] = (id == 0 ? r : -r);
        } else {
          const double ang = 2.0 * M_PI * id / direction_samples;
          x.assign(d, 0.0);
          x[0] = r * std::cos(ang);
          x[1] = r * std::sin(ang);
        }
        field.drift(s, x.data(), b.data());
        worst = std::max(worst, dot(x.data(), b.data(), d) + field.eta() * norm(x.data(), d));
      }
    }
  }
  return worst;
}

double gradient_consistency_error(const DriftField& field, double box_half_width,
                                  int phase_samples, int point_samples, double fd_step) {
  if (!field.has_potential()) throw ConfigError("gradient check requires a potential");
  const int d = field.dim();
  Vec x(d), b(d), xp(d), xm(d);
  double worst = 0.0;
  for (int ip = 0; ip < phase_samples; ++ip) {
    const double s = static_cast<double>(ip) / phase_samples;
    for (int q = 0; q < point_samples; ++q) {
      // low-discrepancy-ish deterministic points in the box
      for (int i = 0; i < d; ++i) {
        const double u = std::fmod(0.5 + (q + 1) * (i + 1) * 0.6180339887498949, 1.0);
        x[i] = (2.0 * u - 1.0) * box_half_width;
      }
      field.drift(s, x.data(), b.data());
      for (int i = 0; i < d; ++i) {
        xp = x;
        xm = x;
        xp[i] += fd_step;
        xm[i] -= fd_step;
        const double grad_i =
            (field.potential(s, xp.data()) - field.potential(s, xm.data())) / (2.0 * fd_step);
        worst = std::max(worst, std::abs(b[i] + grad_i));
      }
    }
  }
  return worst;
}

BasinLabel classify_attraction(const DriftField& field, const GeometrySpec& geom, double s,
                               const Vec& y, const ClassifyOptions& opts) {
  const int d = field.dim();
  if (static_cast<int>(y.size()) != d) throw ConfigError("classification point has wrong dimension");
  if (!all_finite(y.data(), d)) throw ConfigError("classification point must be finite");

  const double r = opts.radius_factor * geom.equilibrium_gap();
  const double r_esc = opts.escape_factor *
                       std::max({field.r0(), norm(geom.x_minus), norm(geom.x_plus), norm(y)});

  if (dist(y, geom.x_minus) <= r) return BasinLabel::minus;
  if (dist(y, geom.x_plus) <= r) return BasinLabel::plus;

  BasinLabel label = BasinLabel::unresolved;
  OdeOptions ode;
  ode.max_steps = opts.step_budget;
  ode.h_max = 10.0;
  auto f = [&](const double* x, double* out) { field.drift(s, x, out); };
  auto stop = [&](double, const Vec& x) {
    if (norm(x) > r_esc) {
      label = BasinLabel::unresolved;
      throw FieldDivergenceError("frozen-flow trajectory left the escape radius " +
                                 std::to_string(r_esc));
    }
    if (dist(x, geom.x_minus) <= r) {
      label = BasinLabel::minus;
      return OdeStop::done;
    }
    if (dist(x, geom.x_plus) <= r) {
      label = BasinLabel::plus;
      return OdeStop::done;
    }
    return OdeStop::proceed;
  };
  integrate_adaptive(f, y, stop, ode);
  return label;
}

}  // namespace reslab
