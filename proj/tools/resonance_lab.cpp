// Experiment driver: config ingestion, subcommand dispatch, deterministic
// CSV/JSON artifact emission.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "reslab/action.hpp"
#include "reslab/chain.hpp"
#include "reslab/config.hpp"
#include "reslab/io.hpp"
#include "reslab/landscape.hpp"
#include "reslab/resonance.hpp"
#include "reslab/sde.hpp"
#include "reslab/version.hpp"

namespace {

using namespace reslab;
using nlohmann::json;

struct RunContext {
  ExperimentConfig cfg;
  std::string out_dir;
  std::string profiles_path;  // optional precomputed profile CSV
  int workers = 1;
  std::uint64_t seed = 0;

  std::string path(const std::string& name) const { return out_dir + "/" + name; }
  std::string meta() const { return meta_line(cfg.config_hash, seed); }
  json meta_json() const {
    return json{{"version", kVersion},
                {"config_hash", cfg.config_hash},
                {"seed", seed}};
  }
  ActionOptions action_options() const {
    ActionOptions a;
    a.grad_tol = cfg.action.grad_tol;
    a.max_iterations = cfg.action.max_iterations;
    a.t0 = cfg.action.t0;
    a.t_max = cfg.action.t_max;
    return a;
  }
  SimConfig sim_config(double eps) const {
    SimConfig s;
    s.eps = eps;
    s.mu = cfg.sim.mu.value_or(1.0);
    s.dt = cfg.sim.dt;
    s.master_seed = seed;
    s.path_count = cfg.sim.path_count;
    return s;
  }
};

ProfilePair compute_profiles(const RunContext& ctx, const Benchmark& bench) {
  if (!ctx.profiles_path.empty()) return read_profiles_csv(ctx.profiles_path);
  const ActionOptions opts = ctx.action_options();
  return ProfilePair{
      energy_profile(*bench.field, bench.geometry, Basin::minus, ctx.cfg.action.grid_size, opts),
      energy_profile(*bench.field, bench.geometry, Basin::plus, ctx.cfg.action.grid_size, opts)};
}

void write_json(const RunContext& ctx, const std::string& name, json doc) {
  doc["meta"] = ctx.meta_json();
  write_text_file(ctx.path(name), doc.dump(2) + "\n");
}

int run_energy(const RunContext& ctx) {
  const Benchmark bench = ctx.cfg.landscape.build();
  const ProfilePair p = compute_profiles(ctx, bench);

  write_profiles_csv(ctx.path("energy_profile.csv"), ctx.meta(), p.minus, p.plus);

  json summary;
  summary["grid_size"] = p.minus.grid_size();
  summary["e_minus_min"] = p.minus.min_value();
  summary["e_minus_max"] = p.minus.max_value();
  summary["e_plus_min"] = p.plus.min_value();
  summary["e_plus_max"] = p.plus.max_value();
  std::string why;
  summary["shape_check_minus"] = check_profile_shape(p.minus, &why);
  summary["shape_check_plus"] = check_profile_shape(p.plus, &why);
  write_json(ctx, "energy_summary.json", std::move(summary));
  return 0;
}

int run_qp(const RunContext& ctx) {
  const Benchmark bench = ctx.cfg.landscape.build();
  const QpResult q = quasi_potential(*bench.field, ctx.cfg.query.phase, ctx.cfg.query.x,
                                     ctx.cfg.query.y, ctx.action_options());
  json doc;
  doc["phase"] = ctx.cfg.query.phase;
  doc["x"] = ctx.cfg.query.x;
  doc["y"] = ctx.cfg.query.y;
  doc["value"] = q.value;
  doc["best_horizon"] = q.best_horizon;
  doc["converged"] = q.converged;
  write_json(ctx, "quasi_potential.json", std::move(doc));
  std::cout << "V^s(x, y) = " << format_double(q.value) << (q.converged ? "" : " (NOT_CONVERGED)")
            << "\n";
  return q.converged ? 0 : 3;
}

int run_simulate(const RunContext& ctx) {
  const Benchmark bench = ctx.cfg.landscape.build();
  SimConfig sim = ctx.sim_config(*ctx.cfg.sim.epsilon);
  sim.horizon = ctx.cfg.sim.horizon_multiplier * sim.time_scale();
  sim.validate(bench.field.get(), &bench.geometry);

  const Vec start = ctx.cfg.query.x.empty() ? bench.geometry.x_minus : ctx.cfg.query.x;
  const Vec target = ctx.cfg.query.y.empty() ? bench.geometry.x_plus : ctx.cfg.query.y;
  const double rho = *ctx.cfg.sim.rho;

  std::vector<PathOutcome> outcomes(sim.path_count);
  for_each_path(sim.path_count, sim.master_seed, ctx.workers, [&](long p, PathRng& rng) {
    outcomes[p] = simulate_until(*bench.field, sim, start, 0.0, target, rho, rng,
                                 &bench.geometry);
  });

  std::vector<std::string> cols = {"path_id", "stop_reason", "stop_time", "phase_at_stop"};
  for (int i = 0; i < bench.field->dim(); ++i) cols.push_back("x" + std::to_string(i));
  CsvWriter csv(ctx.path("paths.csv"), ctx.meta(), cols);
  long hits = 0;
  for (long p = 0; p < sim.path_count; ++p) {
    const PathOutcome& o = outcomes[p];
    hits += o.reason == StopReason::hit_target;
    std::vector<std::string> cells = {std::to_string(p), stop_reason_name(o.reason),
                                      CsvWriter::cell(o.stop_time),
                                      CsvWriter::cell(o.phase_at_stop)};
    for (double c : o.final_point) cells.push_back(CsvWriter::cell(c));
    csv.row(cells);
  }
  json doc;
  doc["paths"] = sim.path_count;
  doc["hit_target"] = hits;
  write_json(ctx, "simulate_summary.json", std::move(doc));
  return 0;
}

int run_window(const RunContext& ctx) {
  const Benchmark bench = ctx.cfg.landscape.build();
  const ProfilePair p = compute_profiles(ctx, bench);
  const double mu = *ctx.cfg.sim.mu;
  const double rho = *ctx.cfg.sim.rho;

  CsvWriter csv(ctx.path("window_estimates.csv"), ctx.meta(),
                {"eps", "mu", "h", "basin", "hits", "trials", "M_hat", "stderr", "escaped"});
  json rows = json::array();
  for (double h : ctx.cfg.resolved_h_ladder()) {
    for (double eps : ctx.cfg.resolved_eps_ladder()) {
      SimConfig sim = ctx.sim_config(eps);
      const WindowMeasure wm = estimate_window_measure(
          *bench.field, bench.geometry, sim, p.minus, p.plus, mu, h, rho, ctx.workers);
      for (const WindowEstimate* est : {&wm.minus_side, &wm.plus_side}) {
        csv.row({CsvWriter::cell(eps), CsvWriter::cell(mu), CsvWriter::cell(h),
                 basin_name(est->window.basin), std::to_string(est->hits),
                 std::to_string(est->path_count), CsvWriter::cell(est->m_hat()),
                 CsvWriter::cell(est->std_error()), std::to_string(est->escaped)});
      }
      rows.push_back(json{{"eps", eps},
                          {"h", h},
                          {"measure", wm.measure},
                          {"m_minus", wm.minus_side.m_hat()},
                          {"m_plus", wm.plus_side.m_hat()}});
    }
  }
  json doc;
  doc["mu"] = mu;
  doc["rho"] = rho;
  doc["measures"] = std::move(rows);
  write_json(ctx, "window_summary.json", std::move(doc));
  return 0;
}

int run_rate(const RunContext& ctx) {
  const Benchmark bench = ctx.cfg.landscape.build();
  const ProfilePair p = compute_profiles(ctx, bench);
  const double h = *ctx.cfg.sim.h;
  const double rho = *ctx.cfg.sim.rho;
  std::vector<double> mus = ctx.cfg.sim.mu_grid;
  if (mus.empty() && ctx.cfg.sim.mu) mus.push_back(*ctx.cfg.sim.mu);

  CsvWriter csv(ctx.path("rate_points.csv"), ctx.meta(),
                {"mu", "eps", "M_hat", "log_miss", "usable"});
  json fits = json::array();
  for (double mu : mus) {
    const RateFit fit = fit_rate(*bench.field, bench.geometry, ctx.sim_config(0.1), p.minus,
                                 p.plus, mu, h, rho, ctx.cfg.resolved_eps_ladder(), ctx.workers);
    for (const RatePoint& pt : fit.points)
      csv.row({CsvWriter::cell(mu), CsvWriter::cell(pt.eps), CsvWriter::cell(pt.value),
               CsvWriter::cell(pt.usable ? std::log1p(-pt.value) : 0.0),
               pt.usable ? "1" : "0"});
    fits.push_back(json{{"mu", mu},
                        {"slope", fit.slope},
                        {"intercept", fit.intercept},
                        {"residual", fit.residual},
                        {"predicted", fit.predicted}});
  }
  json doc;
  doc["h"] = h;
  doc["fits"] = std::move(fits);
  write_json(ctx, "rate_summary.json", std::move(doc));
  return 0;
}

int run_resonance(const RunContext& ctx) {
  const Benchmark bench = ctx.cfg.landscape.build();
  const ProfilePair p = compute_profiles(ctx, bench);
  const ResonancePoint rp = find_resonance_point(p.minus, p.plus, ctx.cfg.resolved_h_ladder());

  CsvWriter csv(ctx.path("resonance_point.csv"), ctx.meta(),
                {"h", "mu_R", "objective", "boundary"});
  for (std::size_t i = 0; i < rp.h_values.size(); ++i)
    csv.row({CsvWriter::cell(rp.h_values[i]), CsvWriter::cell(rp.mu_r[i]),
             CsvWriter::cell(rp.objective[i]), rp.boundary[i] ? "1" : "0"});

  json doc;
  doc["interval_lower"] = rp.interval.lower;
  doc["interval_upper"] = rp.interval.upper;
  doc["extrapolated_mu_R"] = rp.extrapolated;
  doc["boundary_flag"] = rp.boundary_flag;
  doc["inflection_found"] = rp.inflection_found;
  if (rp.inflection_found) {
    doc["inflection_phase"] = rp.inflection_phase;
    doc["inflection_value"] = rp.inflection_value;
  }
  write_json(ctx, "resonance_summary.json", std::move(doc));
  return 0;
}

int run_chain(const RunContext& ctx) {
  const Benchmark bench = ctx.cfg.landscape.build();
  const ProfilePair p = compute_profiles(ctx, bench);
  const double h = *ctx.cfg.sim.h;
  const std::vector<double> ladder = ctx.cfg.resolved_eps_ladder();
  const double lag = detect_phase_lag(p.minus, p.plus);
  const double mu = ctx.cfg.sim.mu ? *ctx.cfg.sim.mu : ctx.cfg.sim.mu_grid.front();

  const ChainSpec spec{p.minus, p.plus, lag, ladder.front(), mu};
  spec.validate(0.05 * p.minus.max_value());

  const TransitionDensity dm = first_transition_density(spec, Basin::minus);
  CsvWriter csv(ctx.path("chain_density.csv"), ctx.meta(), {"t", "p", "cumulative"});
  for (std::size_t k = 0; k < dm.time.size(); ++k)
    csv.row({CsvWriter::cell(dm.time[k]), CsvWriter::cell(dm.density[k]),
             CsvWriter::cell(1.0 - std::exp(-dm.cum_rate[k]))});

  std::vector<RatePoint> pts;
  json measures = json::array();
  for (double eps : ladder) {
    const ChainSpec cs{p.minus, p.plus, lag, eps, mu};
    const ChainWindowMeasure wm = chain_window_measure(cs, h);
    measures.push_back(json{{"eps", eps},
                            {"N", wm.measure},
                            {"mass_minus", wm.mass_minus},
                            {"mass_plus", wm.mass_plus}});
    pts.push_back(RatePoint{eps, wm.measure, 1.0, true});
  }
  json doc;
  doc["mu"] = mu;
  doc["h"] = h;
  doc["phase_lag"] = lag;
  doc["density_total_mass"] = dm.total_mass;
  doc["measures"] = std::move(measures);
  if (pts.size() >= 3) {
    const RateFit fit = fit_rate_points(std::move(pts), predicted_rate(p.minus, p.plus, mu, h));
    doc["rate_fit"] = json{{"slope", fit.slope},
                           {"intercept", fit.intercept},
                           {"predicted", fit.predicted}};
  }
  write_json(ctx, "chain_summary.json", std::move(doc));
  return 0;
}

int run_compare(const RunContext& ctx, bool with_diffusion) {
  const Benchmark bench = ctx.cfg.landscape.build();
  const ProfilePair p = compute_profiles(ctx, bench);
  const double h = *ctx.cfg.sim.h;
  const std::vector<double> ladder = ctx.cfg.resolved_eps_ladder();

  std::vector<double> mus = ctx.cfg.sim.mu_grid;
  if (mus.empty()) {
    const ResonanceInterval ir = resonance_interval(p.minus, p.plus);
    if (ir.empty) throw ConfigError("resonance interval is empty; no mu grid");
    const int n = ctx.cfg.sim.mu_grid_count > 0 ? ctx.cfg.sim.mu_grid_count : 21;
    for (int i = 0; i < n; ++i)
      mus.push_back(ir.lower + (i + 1) * (ir.upper - ir.lower) / (n + 1));
  }

  std::vector<RateFit> dfits;
  if (with_diffusion) {
    const double rho = ctx.cfg.sim.rho.value_or(0.2 * bench.geometry.equilibrium_gap() * 0.5);
    for (double mu : mus) {
      SimConfig sim = ctx.sim_config(0.1);
      sim.mu = mu;
      dfits.push_back(fit_rate(*bench.field, bench.geometry, sim, p.minus, p.plus, mu, h, rho,
                               ladder, ctx.workers));
    }
  }

  const CompareReport rep = compare_resonance(p.minus, p.plus, ladder.front(), mus, h, ladder,
                                              with_diffusion ? &dfits : nullptr);

  CsvWriter csv(ctx.path("compare.csv"), ctx.meta(),
                {"mu", "predicted", "chain_predicted", "chain_fit", "diffusion_fit"});
  for (const CompareRow& r : rep.rows)
    csv.row({CsvWriter::cell(r.mu), CsvWriter::cell(r.predicted_diffusion),
             CsvWriter::cell(r.predicted_chain), CsvWriter::cell(r.chain_fit),
             CsvWriter::cell(r.diffusion_fit)});

  json doc;
  doc["h"] = h;
  doc["argmin_predicted_mu"] = rep.rows[rep.argmin_predicted].mu;
  doc["argmin_chain_predicted_mu"] = rep.rows[rep.argmin_chain_predicted].mu;
  doc["argmin_chain_fit_mu"] = rep.rows[rep.argmin_chain_fit].mu;
  if (rep.argmin_diffusion >= 0)
    doc["argmin_diffusion_mu"] = rep.rows[rep.argmin_diffusion].mu;
  doc["pass"] = rep.pass;
  write_json(ctx, "compare_summary.json", std::move(doc));
  std::cout << (rep.pass ? "PASS" : "FAIL") << ": resonance argmin agreement\n";
  return rep.pass ? 0 : 3;
}

int run_validate(const RunContext& ctx) {
  const Benchmark bench = ctx.cfg.landscape.build();
  const DriftField& field = *bench.field;
  const GeometrySpec& geom = bench.geometry;
  json checks;
  bool ok = true;

  {  // inward drift (growth condition) on samples
    const double margin = inward_drift_margin(field);
    checks["inward_drift_margin"] = margin;
    ok = ok && margin < 0.0;
  }
  {  // equilibria time-invariant
    double worst = 0.0;
    for (int j = 0; j < 16; ++j) {
      const double s = j / 16.0;
      worst = std::max({worst, norm(field.drift_at(s, geom.x_minus)),
                        norm(field.drift_at(s, geom.x_plus))});
    }
    checks["equilibrium_drift"] = worst;
    ok = ok && worst < 1e-12;
  }
  {  // classification sanity
    const bool cls = classify_attraction(field, geom, 0.0, geom.x_minus) == BasinLabel::minus &&
                     classify_attraction(field, geom, 0.0, geom.x_plus) == BasinLabel::plus &&
                     classify_attraction(field, geom, 0.0, geom.separatrix_point()) ==
                         BasinLabel::unresolved;
    checks["classification"] = cls;
    ok = ok && cls;
  }
  {  // gradient consistency
    const double err = gradient_consistency_error(field, 1.5);
    checks["gradient_consistency"] = err;
    ok = ok && err <= 1e-8;
  }
  const ProfilePair p = compute_profiles(ctx, bench);
  {  // profile shape (monotone between extremes, single extrema pair)
    std::string why;
    const bool sm = check_profile_shape(p.minus, &why);
    const bool sp = check_profile_shape(p.plus, &why);
    checks["profile_shape"] = sm && sp;
    ok = ok && sm && sp;
  }
  {  // energy vs twice the well depth
    double worst_rel = 0.0;
    for (int j = 0; j < p.minus.grid_size(); ++j) {
      const double s = p.minus.phase(j);
      const double dm = 2.0 * well_depth(field, geom, s, Basin::minus);
      const double dp = 2.0 * well_depth(field, geom, s, Basin::plus);
      worst_rel = std::max({worst_rel, std::abs(p.minus.values()[j] - dm) / dm,
                            std::abs(p.plus.values()[j] - dp) / dp});
    }
    checks["energy_vs_twice_depth_rel"] = worst_rel;
    ok = ok && worst_rel <= 0.03;
  }

  json doc;
  doc["checks"] = std::move(checks);
  doc["pass"] = ok;
  write_json(ctx, "validate_report.json", std::move(doc));
  std::cout << (ok ? "PASS" : "FAIL") << ": landscape and profile validation\n";
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-resonance laboratory for slowly forced double-well diffusions"};
  app.set_version_flag("--version", reslab::kVersion);

  std::string config_path;
  std::string out_dir = "out";
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 0) workers = 1;
  std::uint64_t seed_flag = 0;
  bool seed_given = false;
  bool with_diffusion = false;

  std::string profiles_path;
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "worker thread cap");
  app.add_option("--profiles", profiles_path,
                 "energy-profile CSV from a previous `energy` run (skips recomputation)");
  auto* seed_opt = app.add_option("--seed", seed_flag, "override the master seed");
  app.require_subcommand(1);
  app.fallthrough();

  std::vector<std::string> names = {"energy",    "qp",    "simulate", "window", "rate",
                                    "resonance", "chain", "compare",  "validate"};
  for (const auto& n : names) app.add_subcommand(n)->fallthrough();
  app.get_subcommand("compare")
      ->add_flag("--with-diffusion", with_diffusion, "include Monte Carlo diffusion fits");

  CLI11_PARSE(app, argc, argv);
  seed_given = seed_opt->count() > 0;

  try {
    RunContext ctx;
    ctx.cfg = reslab::ExperimentConfig::from_file(config_path);
    ctx.out_dir = out_dir;
    ctx.profiles_path = profiles_path;
    ctx.workers = std::max(1, workers);

    ctx.seed = ctx.cfg.sim.master_seed;
    if (const char* env = std::getenv("RESONANCE_LAB_SEED")) ctx.seed = std::strtoull(env, nullptr, 10);
    if (seed_given) ctx.seed = seed_flag;

    const std::string sub = app.get_subcommands().front()->get_name();
    ctx.cfg.require(sub);
    std::filesystem::create_directories(ctx.out_dir);

    if (sub == "energy") return run_energy(ctx);
    if (sub == "qp") return run_qp(ctx);
    if (sub == "simulate") return run_simulate(ctx);
    if (sub == "window") return run_window(ctx);
    if (sub == "rate") return run_rate(ctx);
    if (sub == "resonance") return run_resonance(ctx);
    if (sub == "chain") return run_chain(ctx);
    if (sub == "compare") return run_compare(ctx, with_diffusion);
    if (sub == "validate") return run_validate(ctx);
    std::cerr << "unknown subcommand: " << sub << "\n";
    return 2;
  } catch (const reslab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const reslab::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
