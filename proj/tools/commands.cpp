#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hwb/config.hpp"
#include "hwb/error.hpp"
#include "hwb/ground_state.hpp"
#include "hwb/numerics.hpp"
#include "hwb/runner.hpp"
#include "json.hpp"

namespace hwbcli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path out_dir(const Common& c, const char* fallback) {
  fs::path p = c.out.value_or(fallback);
  fs::create_directories(p);
  return p;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

int ground_state(const Common& c) {
  const std::size_t n = c.resolution.value_or(1024);
  hwb::LineGrid grid(n, 1.0);
  auto gs = hwb::solve_ground_state(grid, 3, 1e-12, 2000);
  auto p = hwb::build_profile_chain(gs, 1e-11);
  auto k = hwb::kernel_identities(gs, p);
  const auto dir = out_dir(c, "out");

  json j = {{"points", n},
            {"scale", 1.0},
            {"residual_l2", gs.residual_l2},
            {"iterations", gs.iterations},
            {"mass", gs.mass},
            {"q0", hwb::LineTable(gs.q)(0.0).real()},
            {"decay", {{"exponent", gs.decay_fit.exponent}, {"prefactor", gs.decay_fit.prefactor},
                       {"window", {gs.decay_fit.lo, gs.decay_fit.hi}}}},
            {"gn_functional", hwb::gn_functional(gs.q, gs.mass)},
            {"energy", hwb::energy(gs.q)},
            {"e1", p.e1},
            {"p1", p.p1},
            {"solve_residuals", p.solve_residuals},
            {"kernel", {{"lminus_q", k.lminus_q}, {"lplus_dq", k.lplus_dq}, {"lplus_lambda_q", k.lplus_lambda_q},
                        {"lplus_rho", k.lplus_rho}, {"lminus_g1", k.lminus_g1}, {"lminus_s1", k.lminus_s1},
                        {"mass_identity", k.mass_identity}}}};
  std::ofstream(dir / "ground_state.json") << j.dump(2) << "\n";

  // S3 is stored by its real shape; it enters the profile with a factor i.
  std::ofstream csv(dir / "profiles.csv");
  csv << "x,weight,Q,S1,G1,G2,S2,S3,rho,varrho_b,varrho_v\n";
  for (std::size_t i = 0; i < n; ++i) {
    csv << num(grid.node(i)) << "," << num(grid.weight(i));
    for (const auto* f : {&p.q, &p.s1, &p.g1, &p.g2, &p.s2, &p.s3, &p.rho, &p.varrho_b, &p.varrho_v}) {
      csv << "," << num(f->values()[i].real());
    }
    csv << "\n";
  }
  if (!c.quiet) {
    std::cout << "ground state: residual " << gs.residual_l2 << ", |Q|^2 = " << gs.mass << ", decay exponent "
              << gs.decay_fit.exponent << "\nwrote " << (dir / "ground_state.json").string() << " and "
              << (dir / "profiles.csv").string() << "\n";
  }
  return 0;
}

int profiles(const Common& c) {
  const std::size_t n = c.resolution.value_or(1024);
  auto bank = hwb::reference_bank(n, 1.0, 1e-12, 1e-11);
  std::vector<double> bs, l2, sup;
  for (int i = 0; i <= 6; ++i) {
    const double b = 0.02 + 0.01 * i;
    auto r = hwb::profile_residual(bank->profiles(), b, b * b);
    bs.push_back(b);
    l2.push_back(r.l2);
    sup.push_back(r.weighted_sup);
  }
  const double slope = hwb::fit_loglog(bs, l2).slope;
  const auto dir = out_dir(c, "out");
  std::ofstream csv(dir / "psi_scaling.csv");
  csv << "b,v,psi_l2,weighted_sup,slope\n";
  for (std::size_t i = 0; i < bs.size(); ++i) {
    csv << num(bs[i]) << "," << num(bs[i] * bs[i]) << "," << num(l2[i]) << "," << num(sup[i]) << "," << num(slope)
        << "\n";
  }
  if (!c.quiet) std::cout << "Psi slope " << slope << "; wrote " << (dir / "psi_scaling.csv").string() << "\n";
  return 0;
}

namespace {

hwb::RunConfig load_config(const Common& c) {
  if (!c.config) throw hwb::ValidationError("--config is required");
  auto cfg = hwb::parse_config(*c.config);
  if (c.out) cfg.output_dir = *c.out;
  if (c.resolution) cfg.n_points = *c.resolution;
  hwb::validate(cfg);
  return cfg;
}

void print_report(const hwb::RunReport& r) {
  std::cout << "run " << r.dir.string() << ": " << r.termination;
  if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
  std::cout << ", " << r.rows.size() << " samples, " << r.steps << " steps\n";
  if (!r.analyzed) return;
  std::cout << "  lambda rel err max " << r.lambda_rel_err_max << ", |alpha - x| max " << r.alpha_err_max << "\n"
            << "  slopes: v/lambda-1 " << r.v_ratio_slope << ", Mod " << r.mod_slope << ", localized mass "
            << r.loc_mass_slope << "\n"
            << "  mass drift " << r.mass_drift << ", ball mass drift " << r.ball_drift_max << "\n"
            << "  sandwich C1 " << r.sandwich.c1 << " C2 " << r.sandwich.c2 << ", monotonicity pass "
            << r.monotonicity.pass_fraction << ", corridors " << r.corridor_trust_fraction << "\n";
}

}  // namespace

int run(const Common& c, const std::vector<double>& schedule) {
  auto cfg = load_config(c);
  hwb::RunOptions opts;
  if (!c.quiet) opts.log = &std::cerr;
  if (!schedule.empty()) {
    auto rows = hwb::run_schedule(cfg, schedule, opts);
    fs::create_directories(cfg.output_dir);
    const auto path = fs::path(cfg.output_dir) / "schedule.csv";
    std::ofstream csv(path);
    csv << "t_start,config_hash,termination,lambda_rel_err_final,lambda_rel_err_max\n";
    for (const auto& e : rows) {
      csv << num(e.t_start) << "," << e.hash << "," << e.termination << "," << num(e.lambda_rel_err_final) << ","
          << num(e.lambda_rel_err_max) << "\n";
    }
    if (!c.quiet) std::cout << "wrote " << path.string() << "\n";
    return 0;
  }
  auto rep = hwb::run_experiment(cfg, opts);
  if (!c.quiet) print_report(rep);
  return rep.termination == "numerical_error" ? 2 : 0;
}

int diagnose(const Common& c) {
  fs::path dir;
  if (c.out) {
    dir = *c.out;
  } else {
    auto cfg = load_config(c);
    dir = fs::path(cfg.output_dir) / hwb::config_hash(cfg).substr(0, 16);
  }
  auto cfg = hwb::parse_config(dir / "config.json");
  hwb::RunReport rep;
  rep.hash = hwb::config_hash(cfg);
  rep.dir = dir;
  {
    std::ifstream f(dir / "summary.json");
    if (!f) throw hwb::ValidationError("missing summary.json in " + dir.string());
    json s = json::parse(f);
    rep.q_mass = s.at("q_mass").get<double>();
    rep.termination = s.at("termination").get<std::string>();
    rep.detail = s.at("detail").get<std::string>();
    rep.steps = s.at("steps").get<long>();
  }
  rep.rows = hwb::read_trajectory(dir / "trajectory.csv", cfg.K);
  hwb::analyze(cfg, rep);
  hwb::write_summary(dir / "diagnose.json", cfg, rep);
  if (!c.quiet) print_report(rep);
  return 0;
}

}  // namespace hwbcli
