// Command line front end: ground-state, profiles, run, diagnose, verify.
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "hwb/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-bubble blow-up toolkit for the half-wave equation"};
  app.require_subcommand(1);
  hwbcli::Common common;
  std::vector<double> schedule;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON run configuration");
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--resolution", common.resolution, "grid points (simulation or reference grid)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", common.quiet, "suppress progress output");
  };
  auto* gs = app.add_subcommand("ground-state", "solve for Q and the profile chain, write them out");
  auto* pr = app.add_subcommand("profiles", "profile residual scaling sweep");
  auto* rn = app.add_subcommand("run", "run an experiment from a config");
  auto* dg = app.add_subcommand("diagnose", "recompute series diagnostics of a stored run");
  auto* vf = app.add_subcommand("verify", "property suite");
  for (auto* s : {gs, pr, rn, dg, vf}) add_common(s);
  rn->add_option("--schedule", schedule, "comma separated start times, one run each")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gs->parsed()) return hwbcli::ground_state(common);
    if (pr->parsed()) return hwbcli::profiles(common);
    if (rn->parsed()) return hwbcli::run(common, schedule);
    if (dg->parsed()) return hwbcli::diagnose(common);
    if (vf->parsed()) return hwbcli::verify(common);
  } catch (const hwb::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const hwb::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
