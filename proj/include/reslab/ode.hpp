#pragma once

#include <functional>
#include <vector>

#include "reslab/vec.hpp"

namespace reslab {

// Adaptive explicit Dormand-Prince 5(4) integrator for smooth autonomous
// systems (the frozen-phase flow). Small-dimensional, allocation-light.
struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 1e-3;
  double h_max = 1.0;
  long max_steps = 1'000'000;
};

enum class OdeStop { proceed, done };

struct OdeResult {
  bool stopped;     // a callback returned done
  long steps;       // accepted steps
  double t;         // final time
  Vec state;        // final state
};

// Integrates x' = f(x) from `x0`; after each accepted step calls
// `on_step(t, x)` and stops when it returns done or max_steps is hit.
OdeResult integrate_adaptive(const std::function<void(const double*, double*)>& f, Vec x0,
                             const std::function<OdeStop(double, const Vec&)>& on_step,
                             const OdeOptions& opts = {});

}  // namespace reslab
