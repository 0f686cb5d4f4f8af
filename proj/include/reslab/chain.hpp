#pragma once

#include <cstdint>
#include <vector>

#include "reslab/profile.hpp"
#include "reslab/resonance.hpp"

namespace reslab {

// Reduced two-state chain: the rate of leaving state i at natural time t is
// exp(-e_i(t/Te) / eps), with e_i the energy needed to exit basin i.
struct ChainSpec {
  EnergyProfile e_minus;
  EnergyProfile e_plus;
  double phase_lag = 0.0;  // e_-(t) = e_+(t + phase_lag)
  double eps = 0.1;
  double mu = 1.0;

  double time_scale() const { return std::exp(mu / eps); }
  const EnergyProfile& profile(Basin b) const { return b == Basin::minus ? e_minus : e_plus; }

  // Phase-lock check: max_j |e_-(s_j) - e_+(s_j + lag)| must stay within
  // `tol`; throws ConfigError when violated.
  void validate(double tol = 1e-6) const;
};

// Grid shift (in units of 1/M) minimizing max_j |e_-(j) - e_+(j + shift)|.
double detect_phase_lag(const EnergyProfile& e_minus, const EnergyProfile& e_plus);

// exp(-e_i(t/Te)/eps), period-Te in t.
double chain_rate(const ChainSpec& spec, Basin state, double t_natural);

// First-transition law of state i on a natural-time grid, chain started at
// phase start_phase. Density p = rate * exp(-Lambda) with Lambda the
// trapezoidal cumulative rate; the tabulated mass is the exact pushforward
// 1 - exp(-Lambda), so mass([0,H]) = 1 - exp(-int rate) holds to rounding.
struct TransitionDensity {
  Basin state = Basin::minus;
  double start_phase = 0.0;
  double step = 0.0;                // natural-time grid step
  std::vector<double> time;         // relative natural time from the start
  std::vector<double> rate;
  std::vector<double> cum_rate;     // Lambda
  std::vector<double> density;
  double total_mass = 0.0;          // 1 - exp(-Lambda(end))

  // Mass on the absolute natural-time window [t_lo, t_hi].
  double mass_between(double t_lo_abs, double t_hi_abs, double time_scale) const;
  double cum_rate_at(double t_rel) const;  // linear interpolation
};

struct DensityOptions {
  long nodes_per_period = 20000;  // grid step = Te / nodes_per_period
  double horizon_periods = 3.0;   // truncate at 3 Te ...
  double mass_cutoff = 1e-6;      // ... or when 1 - mass <= cutoff
  double min_phase = 0.0;         // cutoff only applies past this phase span
};

// Throws ConfigError if the grid is coarser than Te / 1e4.
TransitionDensity first_transition_density(const ChainSpec& spec, Basin state,
                                           const DensityOptions& opts = {},
                                           double start_phase = 0.0);

struct ChainWindowMeasure {
  WindowSpec window_minus;
  WindowSpec window_plus;
  double mass_minus = 0.0;
  double mass_plus = 0.0;
  double measure = 0.0;  // min over states
};

// N(eps, mu): per-state first-transition mass inside the transition window,
// minimum over the two states. Windows and start phases follow the same
// convention as the diffusion estimator.
ChainWindowMeasure chain_window_measure(const ChainSpec& spec, double h,
                                        const DensityOptions& opts = {});

struct ChainSample {
  std::vector<double> times;  // sorted transition times (relative natural time)
  long censored = 0;          // paths with no transition before the horizon
};

// Inversion sampling of the first transition against the tabulated cumulative
// rate; reproducible per master_seed with counter-based per-path streams.
ChainSample simulate_chain(const ChainSpec& spec, Basin state, std::uint64_t master_seed,
                           long n_paths, const DensityOptions& opts = {},
                           double start_phase = 0.0);

struct CompareRow {
  double mu = 0.0;
  double predicted_diffusion = 0.0;  // Theorem-3.2-style limit from profiles
  double predicted_chain = 0.0;      // Theorem-3.5-style limit, same number
  double chain_fit = 0.0;            // finite-eps quadrature ladder fit
  double diffusion_fit = 0.0;        // Monte Carlo ladder fit (NaN when absent)
};

struct CompareReport {
  std::vector<CompareRow> rows;
  double h = 0.0;
  std::vector<double> chain_eps_ladder;
  int argmin_predicted = -1;
  int argmin_chain_predicted = -1;
  int argmin_chain_fit = -1;
  int argmin_diffusion = -1;  // -1 when no diffusion fits supplied
  bool pass = false;          // argmins agree within one grid step
};

// Robustness comparison on a shared mu grid: per-mu predicted rate, chain
// rate (quadrature), optional diffusion rate, and the argmin of each.
CompareReport compare_resonance(const EnergyProfile& e_minus, const EnergyProfile& e_plus,
                                double eps, const std::vector<double>& mu_grid, double h,
                                const std::vector<double>& chain_eps_ladder,
                                const std::vector<RateFit>* diffusion_fits = nullptr);

}  // namespace reslab
