#pragma once

#include <functional>
#include <memory>

#include "reslab/field.hpp"

namespace reslab {

using DepthFn = std::function<double(double)>;  // period-1, positive

// Double-well benchmark with pinned equilibria (+-1, 0, ...), saddle at the
// origin and separatrix {x1 = 0}. The left/right well depths at phase t are
// D_-(t) and D_+(t) = D_-(t + phase_lag) exactly.
struct Benchmark {
  std::shared_ptr<const DriftField> field;
  GeometrySpec geometry;
  double phase_lag;
  DepthFn depth_minus;

  double depth(double s, Basin b) const {
    return b == Basin::minus ? depth_minus(s) : depth_minus(s + phase_lag);
  }
};

// U(t,x) = 4 D(t, sign(x1)) (x1^4/4 - x1^2/2) + 1/2 sum_{k>=2} x_k^2,
// C^1 across the separatrix. Validates positivity of the depth, the lag
// range and the inward-drift condition on samples at construction.
Benchmark make_benchmark(int dim, DepthFn depth_minus, double phase_lag);

struct ClassifyOptions {
  double radius_factor = 0.1;    // classification radius r = factor * |x_+ - x_-|
  long step_budget = 1'000'000;  // adaptive steps before giving up
  double escape_factor = 3.0;    // R_esc = escape_factor * max(r0, |x_-|, |x_+|, |y|)
};

// Integrates the frozen flow xdot = b(s, x) from y until it enters
// B_r(x_-) or B_r(x_+). Returns unresolved on budget exhaustion (treated as
// separatrix-adjacent); throws FieldDivergenceError if the trajectory leaves
// the escape radius.
BasinLabel classify_attraction(const DriftField& field, const GeometrySpec& geom, double s,
                               const Vec& y, const ClassifyOptions& opts = {});

// Sampled verification of the inward-drift condition
// <x, b(s,x)> + eta |x| < 0 on |x| in [r0, 2 r0]. Returns the worst margin
// (negative means the condition holds everywhere sampled).
double inward_drift_margin(const DriftField& field, int phase_samples = 8,
                           int direction_samples = 16, int radius_samples = 5);

// max |b(s,x) + grad_x U(s,x)| over a sampled box, central differences.
double gradient_consistency_error(const DriftField& field, double box_half_width,
                                  int phase_samples = 4, int point_samples = 9,
                                  double fd_step = 1e-5);

}  // namespace reslab
