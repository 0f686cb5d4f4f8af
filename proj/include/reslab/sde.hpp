#pragma once

#include <cstdint>
#include <functional>

#include "reslab/field.hpp"
#include "reslab/rng.hpp"

namespace reslab {

// Euler-Maruyama configuration at time scale Te = exp(mu/eps).
struct SimConfig {
  double eps = 0.1;           // noise intensity (0 allowed: deterministic flow)
  double mu = 1.0;            // energy scale, Te = exp(mu/eps)
  double dt = 1e-3;           // step in natural time (before the stiffness guard)
  double horizon = 0.0;       // absolute natural-time cap
  double r_abort = 0.0;       // escape radius; 0 = derive from the field
  std::uint64_t master_seed = 0;
  long path_count = 1;

  double time_scale() const;  // Te, +inf when eps == 0
  // Validates ranges; with a field also checks r_abort > max(|x_pm|, r0)
  // and the per-path step budget.
  void validate(const DriftField* field = nullptr, const GeometrySpec* geom = nullptr) const;
  // dt clamped by the stiffness guard dt <= 0.1 / L with L the sampled drift
  // Lipschitz bound near the equilibria.
  double effective_dt(const DriftField& field, const GeometrySpec* geom) const;
  double resolved_r_abort(const DriftField& field, const GeometrySpec* geom) const;
};

enum class StopReason { hit_target, escaped_r, horizon };

inline const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::hit_target: return "HIT_TARGET";
    case StopReason::escaped_r: return "ESCAPED_R";
    default: return "HORIZON";
  }
}

struct PathOutcome {
  StopReason reason = StopReason::horizon;
  double stop_time = 0.0;      // absolute natural time (start_time included)
  double phase_at_stop = 0.0;  // stop_time / Te
  Vec final_point;
};

// One path of dX = b(t/Te, X) dt + sqrt(eps) dW from `start` at absolute
// natural time `start_time`, stopping at the first entry into B_rho(target),
// the first exit from B_{r_abort}(0), or the horizon. Crossing times are
// interpolated linearly within the step. Throws NumericError on NaN state.
PathOutcome simulate_until(const DriftField& field, const SimConfig& cfg, const Vec& start,
                           double start_time, const Vec& target, double rho, PathRng& rng,
                           const GeometrySpec* geom = nullptr);

struct EscapeEstimate {
  long paths = 0;
  long escapes = 0;
  double p_hat = 0.0;
  double std_error = 0.0;
};

// Fraction of paths exiting B_R(0) before `deadline` (natural time).
EscapeEstimate estimate_escape_probability(const DriftField& field, const SimConfig& cfg,
                                           const Vec& start, double radius, double deadline,
                                           int workers);

// Runs fn(path_id, rng) for path_id in [0, n) over `workers` threads with a
// per-path counter-based stream; results must be written to per-path slots or
// reduced with order-independent sums so that tallies do not depend on the
// worker count.
void for_each_path(long n_paths, std::uint64_t master_seed, int workers,
                   const std::function<void(long, PathRng&)>& fn);

}  // namespace reslab
