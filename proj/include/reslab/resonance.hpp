#pragma once

#include <optional>
#include <vector>

#include "reslab/profile.hpp"
#include "reslab/sde.hpp"

namespace reslab {

struct TransitionTimes {
  double a = 0.0;      // inf{t >= 0 : e(t) <= mu}
  double alpha = 0.0;  // inf{t >= 0 : e(t) < mu}
};

// Bisection on the interpolated profile over the first decreasing stretch.
// mu >= max(e) returns {0,0} (the condition already holds at t = 0);
// mu <= min(e) and e(0) <= mu < max(e) are rejected (the latter with a
// start-time shift suggestion).
TransitionTimes transition_times(const EnergyProfile& e, double mu);

struct ResonanceInterval {
  double lower = 0.0;  // max_i inf_t e_i(t)
  double upper = 0.0;  // inf_t max_i e_i(t)
  bool empty = true;
};

ResonanceInterval resonance_interval(const EnergyProfile& e_minus, const EnergyProfile& e_plus);

// Transition window for one basin. When the basin profile starts below mu at
// phase 0 the experiment clock is shifted to the profile's maximum (the
// diffusion is started later); a_abs is the crossing on the shifted clock's
// first decreasing stretch, in absolute phase units.
struct WindowSpec {
  double mu = 0.0;
  double h = 0.0;  // half-width in phase units
  Basin basin = Basin::minus;
  double start_phase = 0.0;  // paths start at x_i at natural time start_phase * Te
  double a_abs = 0.0;        // absolute crossing phase

  double a_rel() const { return a_abs - start_phase; }
  double t_begin(double time_scale) const { return (a_abs - h) * time_scale; }
  double t_end(double time_scale) const { return (a_abs + h) * time_scale; }
};

// Builds and validates the window (0 < h < a_rel, mu below the start value).
WindowSpec make_window(const EnergyProfile& e_basin, Basin basin, double mu, double h);

struct WindowEstimate {
  WindowSpec window;
  double eps = 0.0;
  double rho = 0.0;
  long path_count = 0;
  long hits = 0;
  long escaped = 0;  // ESCAPED_R paths, counted as misses

  double m_hat() const { return path_count > 0 ? double(hits) / double(path_count) : 0.0; }
  double std_error() const;
};

// Monte Carlo estimate of the probability that the first entry into
// B_rho(x_{-i}) falls inside the window, paths started at x_i.
WindowEstimate estimate_window_probability(const DriftField& field, const GeometrySpec& geom,
                                           const SimConfig& cfg, const WindowSpec& window,
                                           double rho, int workers);

struct WindowMeasure {
  WindowEstimate minus_side;
  WindowEstimate plus_side;
  double measure = 0.0;  // min over the two basins
};

WindowMeasure estimate_window_measure(const DriftField& field, const GeometrySpec& geom,
                                      const SimConfig& cfg, const EnergyProfile& e_minus,
                                      const EnergyProfile& e_plus, double mu, double h,
                                      double rho, int workers);

// max_i { mu - e_i(a_mu^i - h) }, the exponential rate both models share.
double predicted_rate(const EnergyProfile& e_minus, const EnergyProfile& e_plus, double mu,
                      double h);

struct RatePoint {
  double eps = 0.0;
  double value = 0.0;   // measure estimate at this eps
  double weight = 1.0;  // WLS weight (inverse variance of log(1-value))
  bool usable = true;   // dropped when value is 0 or 1
};

struct RateFit {
  std::vector<RatePoint> points;
  double slope = 0.0;      // fitted d log(1-M) / d (1/eps), the empirical rate
  double intercept = 0.0;
  double residual = 0.0;   // weighted rms residual
  double predicted = 0.0;  // rate predicted from the profiles
};

// Weighted least squares of log(1 - value) against 1/eps over usable points.
// Throws ConfigError with fewer than 3 usable points.
RateFit fit_rate_points(std::vector<RatePoint> points, double predicted);

// Runs estimate_window_measure per epsilon and fits the exponential rate.
RateFit fit_rate(const DriftField& field, const GeometrySpec& geom, const SimConfig& cfg_template,
                 const EnergyProfile& e_minus, const EnergyProfile& e_plus, double mu, double h,
                 double rho, const std::vector<double>& eps_ladder, int workers);

struct ResonancePoint {
  std::vector<double> h_values;
  std::vector<double> mu_r;        // minimizer per h
  std::vector<double> objective;   // objective value at the minimizer
  std::vector<bool> boundary;      // minimizer within one grid step of I_R boundary
  double extrapolated = 0.0;       // linear h -> 0 limit from the two smallest h
  bool boundary_flag = false;      // extrapolated value at the I_R boundary
  double inflection_phase = 0.0;   // cross-check: point of maximal decrease of e_-
  double inflection_value = 0.0;
  bool inflection_found = false;
  ResonanceInterval interval;
};

// Minimizes mu -> max_i { mu - e_i(a_mu^i - h) } over a fine grid inside I_R
// with golden-section refinement, then extrapolates h -> 0.
ResonancePoint find_resonance_point(const EnergyProfile& e_minus, const EnergyProfile& e_plus,
                                    const std::vector<double>& h_ladder, int mu_grid = 201);

}  // namespace reslab
