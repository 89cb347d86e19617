#include "hwb/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <tuple>

#include "hwb/checkpoint.hpp"
#include "hwb/error.hpp"
#include "hwb/ground_state.hpp"
#include "hwb/numerics.hpp"
#include "json.hpp"

namespace hwb {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Nonlinearity nonlinearity_of(const std::string& s) {
  if (s == "defocusing") return Nonlinearity::defocusing;
  if (s == "linear") return Nonlinearity::linear;
  return Nonlinearity::focusing;
}

// Observation times uniform in 1/|t|, ends included.
std::vector<double> observation_times(const RunConfig& c) {
  const double s0 = 1.0 / std::abs(c.t_start), s1 = 1.0 / std::abs(c.t_stop);
  std::vector<double> out;
  for (int i = 0; i < c.observations; ++i) {
    const double s = s0 + (s1 - s0) * i / (c.observations - 1);
    out.push_back(-1.0 / s);
  }
  out.front() = c.t_start;
  out.back() = c.t_stop;
  return out;
}

std::vector<BubbleParams> advance_guess(const std::vector<BubbleParams>& p, double t0, double t1) {
  if (t0 == t1) return p;
  auto s = integrate_param_ode(p, t0, t1, std::abs(t1 - t0) / 16.0);
  return s.params.back();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

std::shared_ptr<const ProfileBank> reference_bank(std::size_t points, double scale, double gs_tol, double chain_tol) {
  static std::mutex mu;
  static std::map<std::tuple<std::size_t, double, double, double>, std::shared_ptr<const ProfileBank>> cache;
  std::lock_guard lock(mu);
  auto key = std::make_tuple(points, scale, gs_tol, chain_tol);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  LineGrid grid(points, scale);
  auto gs = solve_ground_state(grid, 3, gs_tol, 2000);
  auto bank = std::make_shared<const ProfileBank>(build_profile_chain(gs, chain_tol));
  cache.emplace(key, bank);
  return bank;
}

std::string trajectory_header(int k) {
  std::string h = "t";
  for (int i = 1; i <= k; ++i) {
    for (const char* name : {"lambda", "b", "v", "alpha", "gamma"}) h += "," + std::string(name) + "_" + std::to_string(i);
  }
  h += ",R_l2,R_h12,X,I,E_part,L_part,Mod,mass,energy,momentum";
  for (int i = 1; i <= k; ++i) h += ",ball_mass_" + std::to_string(i);
  for (const char* name : kCorridorNames) h += ",corridor_" + std::string(name);
  h += ",ball_mass_outside,R_hs,eta_l2,eta_h1,eta_h2";
  for (int i = 1; i <= k; ++i) h += ",loc_mass_" + std::to_string(i);
  for (int i = 1; i <= k; ++i) h += ",loc_momentum_" + std::to_string(i);
  h += ",I_A25,I_A50,I_A100,newton_iters";
  return h;
}

void write_trajectory(const std::filesystem::path& path, const RunReport& report, int k) {
  std::ostringstream out;
  out << trajectory_header(k) << "\n";
  for (const auto& r : report.rows) {
    out << fmt(r.t);
    for (const auto& p : r.params) {
      for (double v : {p.lambda, p.b, p.v, p.alpha, p.gamma}) out << "," << fmt(v);
    }
    for (double v : {r.r_l2, r.r_h12, r.x, r.energy.total, r.energy.energy_part, r.energy.virial_part, r.mod,
                     r.conserved.mass, r.conserved.energy, r.conserved.momentum}) {
      out << "," << fmt(v);
    }
    for (double v : r.balls) out << "," << fmt(v);
    for (bool f : r.flags) out << "," << (f ? 1 : 0);
    for (double v : {r.outside, r.r_hs, r.eta[0], r.eta[1], r.eta[2]}) out << "," << fmt(v);
    for (double v : r.loc_mass) out << "," << fmt(v);
    for (double v : r.loc_mom) out << "," << fmt(v);
    for (double v : r.energy_sweep) out << "," << fmt(v);
    out << "," << r.newton_iters << "\n";
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << out.str();
}

std::vector<SampleRow> read_trajectory(const std::filesystem::path& path, int k) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open trajectory " + path.string());
  std::string line;
  std::getline(f, line);
  if (line != trajectory_header(k)) throw ValidationError("trajectory header does not match K = " + std::to_string(k));
  const std::size_t ncol = 1 + 5 * k + 10 + k + kCorridorCount + 5 + 2 * k + 3 + 1;
  std::vector<SampleRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("trajectory: malformed cell '" + cell + "'");
      }
    }
    if (v.size() != ncol) throw ValidationError("trajectory: row has " + std::to_string(v.size()) + " columns");
    SampleRow r;
    std::size_t i = 0;
    r.t = v[i++];
    for (int b = 0; b < k; ++b, i += 5) r.params.push_back({v[i], v[i + 1], v[i + 2], v[i + 3], v[i + 4]});
    r.r_l2 = v[i++];
    r.r_h12 = v[i++];
    r.x = v[i++];
    r.energy.total = v[i++];
    r.energy.energy_part = v[i++];
    r.energy.virial_part = v[i++];
    r.mod = v[i++];
    r.conserved = {v[i], v[i + 1], v[i + 2]};
    i += 3;
    for (int b = 0; b < k; ++b) r.balls.push_back(v[i++]);
    for (int c = 0; c < kCorridorCount; ++c) r.flags[c] = v[i++] != 0.0;
    r.outside = v[i++];
    r.r_hs = v[i++];
    for (int e = 0; e < 3; ++e) r.eta[e] = v[i++];
    for (int b = 0; b < k; ++b) r.loc_mass.push_back(v[i++]);
    for (int b = 0; b < k; ++b) r.loc_mom.push_back(v[i++]);
    for (int e = 0; e < 3; ++e) r.energy_sweep[e] = v[i++];
    r.newton_iters = static_cast<int>(v[i++]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void analyze(const RunConfig& c, RunReport& rep) {
  auto& rows = rep.rows;
  const std::size_t m = rows.size();
  rep.analyzed = false;
  if (m < static_cast<std::size_t>(2 * c.trust_trim + 5)) return;
  const double w2 = c.omega * c.omega;

  ParamSeries series;
  for (const auto& r : rows) {
    series.t.push_back(r.t);
    series.params.push_back(r.params);
  }
  auto mods = mod_vector(series);
  for (std::size_t i = 0; i < m; ++i) rows[i].mod = mods[i].total;

  rep.trust_begin = c.trust_trim;
  rep.trust_end = m - c.trust_trim;
  const std::size_t b = rep.trust_begin, e = rep.trust_end;

  rep.lambda_rel_err_max = 0.0;
  rep.alpha_err_max = 0.0;
  std::vector<double> ts, v_ratio, mod, loc_mass;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = rows[i];
    for (std::size_t k = 0; k < r.params.size(); ++k) {
      rep.lambda_rel_err_max = std::max(rep.lambda_rel_err_max, rel(r.params[k].lambda, w2 * r.t * r.t / 4.0));
      rep.alpha_err_max = std::max(rep.alpha_err_max, std::abs(r.params[k].alpha - c.centers[k]));
    }
  }
  rep.eta_scaled_max = 0.0;
  for (std::size_t i = b; i < e; ++i) {
    const auto& r = rows[i];
    ts.push_back(r.t);
    double vr = 0.0, lm = 0.0;
    for (std::size_t k = 0; k < r.params.size(); ++k) {
      vr = std::max(vr, std::abs(r.params[k].v / r.params[k].lambda - 1.0));
      lm = std::max(lm, std::abs(r.loc_mass[k]));
    }
    v_ratio.push_back(vr);
    mod.push_back(r.mod);
    loc_mass.push_back(lm);
    const double t4 = std::pow(r.t, 4);
    rep.eta_scaled_max = std::max(rep.eta_scaled_max, r.eta[0] * r.t * r.t / (r.mod + t4));
  }
  rep.v_ratio_slope = fit_loglog(ts, v_ratio).slope;
  rep.mod_slope = fit_loglog(ts, mod).slope;
  rep.loc_mass_slope = fit_loglog(ts, loc_mass).slope;

  const auto& first = rows.front().conserved;
  rep.mass_drift = rep.energy_drift = 0.0;
  for (const auto& r : rows) {
    rep.mass_drift = std::max(rep.mass_drift, rel(r.conserved.mass, first.mass));
    rep.energy_drift = std::max(rep.energy_drift, rel(r.conserved.energy, first.energy));
  }
  rep.ball_drift_max = 0.0;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.balls.size(); ++k) {
      rep.ball_drift_max = std::max(rep.ball_drift_max, rel(r.balls[k], rows.front().balls[k]));
    }
  }
  rep.final_ball_rel.clear();
  for (double mk : rows.back().balls) rep.final_ball_rel.push_back(rel(mk, rep.q_mass));
  rep.final_outside_fraction = rows.back().outside / rows.back().conserved.mass;

  std::vector<CorridorSample> cs;
  for (const auto& r : rows) cs.push_back({r.t, r.r_l2, r.r_h12, r.r_hs, r.params});
  rep.corridors = bootstrap_monitor(cs, CorridorTarget{c.omega, c.centers, c.thetas}, c.delta, c.varsigma);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < m; ++i) {
    rows[i].flags = rep.corridors.flags[i];
    if (i >= b && i < e) ok += std::all_of(rows[i].flags.begin(), rows[i].flags.end(), [](bool f) { return f; });
  }
  rep.corridor_trust_fraction = static_cast<double>(ok) / (e - b);

  std::vector<double> xs, en, rl2, rh;
  for (std::size_t i = b; i < e; ++i) {
    xs.push_back(rows[i].x);
    en.push_back(rows[i].energy.total);
    rl2.push_back(rows[i].r_l2);
    rh.push_back(std::hypot(rows[i].r_l2, rows[i].r_h12));
  }
  rep.sandwich = sandwich_fit(ts, xs, en, c.delta);
  MonotonicityOptions mo{c.delta, c.mono_c, c.mono_env, c.tolerances.monotonicity_fraction};
  rep.monotonicity = monotonicity_trend(ts, en, rl2, rh, xs, mo);
  for (std::size_t a = 0; a < kVirialSweep.size(); ++a) {
    std::vector<double> ea;
    for (std::size_t i = b; i < e; ++i) ea.push_back(rows[i].energy_sweep[a]);
    rep.monotonicity_sweep[a] = monotonicity_trend(ts, ea, rl2, rh, xs, mo).pass_fraction;
  }
  rep.analyzed = true;
}

void write_summary(const std::filesystem::path& path, const RunConfig& c, const RunReport& rep) {
  json j;
  j["config_hash"] = rep.hash;
  j["termination"] = rep.termination;
  j["detail"] = rep.detail;
  j["steps"] = rep.steps;
  j["samples"] = rep.rows.size();
  j["q_mass"] = rep.q_mass;
  j["direction"] = c.backward() ? "backward" : "forward";
  j["analyzed"] = rep.analyzed;
  if (rep.analyzed) {
    const auto& t = c.tolerances;
    j["trust_window"] = {rep.rows[rep.trust_begin].t, rep.rows[rep.trust_end - 1].t};
    j["lambda_rel_err_max"] = rep.lambda_rel_err_max;
    j["alpha_err_max"] = rep.alpha_err_max;
    j["slopes"] = {{"v_ratio", rep.v_ratio_slope}, {"mod", rep.mod_slope}, {"localized_mass", rep.loc_mass_slope}};
    j["eta_scaled_max"] = rep.eta_scaled_max;
    j["drift"] = {{"mass", rep.mass_drift}, {"energy", rep.energy_drift}, {"ball_mass", rep.ball_drift_max}};
    j["final_ball_mass_rel"] = rep.final_ball_rel;
    j["final_outside_fraction"] = rep.final_outside_fraction;
    j["sandwich"] = {{"c1", rep.sandwich.c1}, {"c2", rep.sandwich.c2}, {"min_ratio", rep.sandwich.min_ratio},
                     {"max_ratio", rep.sandwich.max_ratio}, {"violations", rep.sandwich.violations}};
    json sweep = json::object();
    for (std::size_t a = 0; a < kVirialSweep.size(); ++a) {
      sweep[std::to_string(static_cast<int>(kVirialSweep[a]))] = rep.monotonicity_sweep[a];
    }
    j["monotonicity"] = {{"A", c.A_virial}, {"pass_fraction", rep.monotonicity.pass_fraction},
                         {"fitted_c_env", rep.monotonicity.fitted_c_env}, {"sweep", sweep}};
    json corr = json::object();
    for (int k = 0; k < kCorridorCount; ++k) {
      corr[kCorridorNames[k]] = {{"exponent", rep.corridors.exponent[k]}, {"constant", rep.corridors.constant[k]},
                                 {"slope", rep.corridors.slope[k]}, {"fraction", rep.corridors.fraction[k]}};
    }
    j["corridors"] = corr;
    j["corridor_trust_fraction"] = rep.corridor_trust_fraction;
    bool balls_ok = rep.ball_drift_max <= t.ball_mass_rel;
    j["checks"] = {{"lambda_tracking", rep.lambda_rel_err_max <= t.lambda_rel},
                   {"alpha", rep.alpha_err_max <= t.alpha_abs},
                   {"v_ratio_slope", rep.v_ratio_slope >= t.v_ratio_slope_min},
                   {"mod_slope", rep.mod_slope >= t.slope_min},
                   {"localized_mass_slope", rep.loc_mass_slope >= t.slope_min},
                   {"mass_drift", rep.mass_drift <= t.mass_drift},
                   {"ball_mass", balls_ok},
                   {"sandwich", rep.sandwich.c1 > 0.0 && rep.sandwich.c2 > 0.0 && rep.sandwich.violations == 0},
                   {"monotonicity", rep.monotonicity.pass_fraction >= t.monotonicity_fraction},
                   {"corridors", rep.corridor_trust_fraction >= t.corridor_fraction}};
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

RunReport run_experiment(const RunConfig& c, const RunOptions& opts) {
  validate(c);
  const auto wall0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.hash = config_hash(c);
  rep.dir = std::filesystem::path(c.output_dir) / rep.hash.substr(0, 16);
  auto log = [&](const std::string& s) {
    if (opts.log) *opts.log << s << std::endl;
  };

  Grid1D grid(c.n_points, c.length);
  const double w2 = c.omega * c.omega;
  const double lambda_min_window = w2 * std::min(c.t_start * c.t_start, c.t_stop * c.t_stop) / 4.0;
  if (lambda_min_window < c.min_points_per_scale * grid.spacing()) {
    throw ValidationError("grid cannot resolve the window: lambda = " + fmt(lambda_min_window) + " needs spacing <= " +
                          fmt(lambda_min_window / c.min_points_per_scale) + ", grid has " + fmt(grid.spacing()));
  }
  auto bank = reference_bank(c.reference_points, c.reference_scale, c.tolerances.ground_state, c.tolerances.chain);
  rep.q_mass = std::pow(line_norm(bank->profiles().q), 2);
  log("profiles ready, |Q|^2 = " + fmt(rep.q_mass));

  if (opts.write) {
    std::filesystem::create_directories(rep.dir / "checkpoints");
    std::ofstream(rep.dir / "config.json", std::ios::binary | std::ios::trunc) << config_echo(c);
  }

  auto bd = boundary_data(grid, *bank, c.omega, c.centers, c.thetas, c.t_start, c.min_points_per_scale);
  const auto loc = localization_set(grid, c.centers);
  const ChiCutoff chi(c.A_virial);
  std::vector<ChiCutoff> sweep;
  for (double a : kVirialSweep) sweep.emplace_back(a);

  Evolver ev(grid, nonlinearity_of(c.nonlinearity));
  RunControl ctl;
  ctl.dt = {c.dt_factor, c.dt_max};
  ctl.observer_stride = c.observer_stride;
  ctl.landmarks = observation_times(c);

  std::vector<BubbleParams> prev = bd.params;
  double prev_t = c.t_start;
  std::string lost;
  int checkpoint_index = 0;

  auto observer = [&](const SimulationState& s, std::optional<double>& lambda_min) -> bool {
    DecomposeOptions dopt;
    dopt.tol = c.tolerances.newton;
    dopt.min_points = c.min_points_per_scale;
    std::optional<DecompositionResult> found;
    try {
      found = decompose(s.u, advance_guess(prev, prev_t, s.t), *bank, dopt);
    } catch (const std::exception& e) {
      lost = e.what();
      return false;
    }
    const auto& dec = *found;
    SampleRow r;
    r.t = s.t;
    r.params = dec.params;
    r.newton_iters = dec.newton_iters;
    const auto& rem = dec.remainder;
    r.r_l2 = l2_norm(rem);
    r.r_h12 = sobolev_norm(rem, 0.5, true);
    r.r_hs = sobolev_norm(rem, 0.5 + c.varsigma, true);
    r.x = r.r_h12 * r.r_h12 + r.r_l2 * r.r_l2 / (s.t * s.t);
    const SpectralField big_u = s.u - rem;
    r.energy = generalized_energy(s.u, big_u, rem, dec.params, loc, chi);
    for (std::size_t a = 0; a < sweep.size(); ++a) {
      r.energy_sweep[a] = generalized_energy(s.u, big_u, rem, dec.params, loc, sweep[a]).total;
    }
    r.conserved = conserved(s.u);
    auto bm = mass_quantization(s.u, c.centers, c.ball_radius);
    r.balls = bm.inside;
    r.outside = bm.outside;
    for (std::size_t k = 0; k < dec.params.size(); ++k) {
      auto uk = render_bubble(grid, dec.params[k], *bank, c.min_points_per_scale);
      r.loc_mass.push_back(localized_mass(uk, rem, loc.phi[k]));
      r.loc_mom.push_back(localized_momentum(s.u, loc.phi[k]));
    }
    double lm = INFINITY;
    for (const auto& p : dec.params) lm = std::min(lm, p.lambda);
    lambda_min = lm;
    prev = dec.params;
    prev_t = s.t;
    const std::size_t idx = rep.rows.size();
    rep.rows.push_back(std::move(r));
    if (opts.write && c.checkpoint_every > 0 && idx % static_cast<std::size_t>(c.checkpoint_every) == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "ckpt_%04d.bin", checkpoint_index++);
      checkpoint_save(s, rep.dir / "checkpoints" / name);
    }
    if (idx % 10 == 0) {
      const auto& row = rep.rows.back();
      log("t = " + fmt(row.t) + "  lambda_1 = " + fmt(row.params[0].lambda) + "  |R| = " + fmt(row.r_l2) +
          "  newton = " + std::to_string(row.newton_iters));
    }
    return true;
  };

  SimulationState s0{c.t_start, bd.u, 0.0, 0};
  auto result = run(ev, s0, c.t_stop, ctl, observer);
  rep.steps = result.steps;
  rep.termination = to_string(result.termination);
  rep.detail = result.detail;
  if (!lost.empty()) {
    rep.termination = "decomposition_lost";
    rep.detail = lost;
  }
  if (opts.write) checkpoint_save(result.final_state, rep.dir / "checkpoints" / "final.bin");
  log("evolution done: " + rep.termination + " after " + std::to_string(rep.steps) + " steps");

  if (rep.rows.size() >= 3) {
    ParamSeries series;
    for (const auto& r : rep.rows) {
      series.t.push_back(r.t);
      series.params.push_back(r.params);
    }
    auto rates = param_rates(series);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      rep.rows[i].eta = profile_error_eta(grid, series.params[i], rates[i], *bank, c.min_points_per_scale).norms;
    }
  }
  analyze(c, rep);

  if (opts.write) {
    write_trajectory(rep.dir / "trajectory.csv", rep, c.K);
    write_summary(rep.dir / "summary.json", c, rep);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    std::ofstream(rep.dir / "timing.json", std::ios::binary | std::ios::trunc)
        << json{{"runtime_seconds", secs}, {"steps", rep.steps}}.dump(2) << "\n";
  }
  return rep;
}

std::vector<ScheduleEntry> run_schedule(const RunConfig& config, const std::vector<double>& starts,
                                        const RunOptions& opts) {
  require(!starts.empty(), "schedule: no start times");
  std::vector<ScheduleEntry> out;
  for (double t0 : starts) {
    RunConfig c = config;
    c.t_start = t0;
    validate(c);
    auto rep = run_experiment(c, opts);
    ScheduleEntry e{t0, rep.hash, rep.termination, 0.0, rep.lambda_rel_err_max};
    if (!rep.rows.empty()) {
      const auto& last = rep.rows.back();
      const double w2 = c.omega * c.omega;
      for (const auto& p : last.params) {
        e.lambda_rel_err_final = std::max(e.lambda_rel_err_final, rel(p.lambda, w2 * last.t * last.t / 4.0));
      }
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace hwb
