#pragma once

// Orchestration of one experiment: boundary data, evolution, tracking,
// diagnostics, and the on-disk artifact set.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hwb/config.hpp"
#include "hwb/diagnostics.hpp"

namespace hwb {

inline constexpr std::array<double, 3> kVirialSweep = {25.0, 50.0, 100.0};

struct SampleRow {
  double t = 0.0;
  std::vector<BubbleParams> params;
  double r_l2 = 0.0;
  double r_h12 = 0.0;  // |D^1/2 R|
  double r_hs = 0.0;   // |D^{1/2+varsigma} R|
  double x = 0.0;
  EnergySplit energy;  // at A_virial
  std::array<double, 3> energy_sweep{};
  double mod = 0.0;
  Conserved conserved;
  std::vector<double> balls;
  double outside = 0.0;
  std::array<bool, kCorridorCount> flags{};
  std::array<double, 3> eta{};
  std::vector<double> loc_mass;
  std::vector<double> loc_mom;
  int newton_iters = 0;
};

struct RunReport {
  std::string hash;
  std::filesystem::path dir;
  std::string termination;
  std::string detail;
  long steps = 0;
  double q_mass = 0.0;
  std::vector<SampleRow> rows;
  std::size_t trust_begin = 0, trust_end = 0;

  bool analyzed = false;
  double lambda_rel_err_max = 0.0;
  double alpha_err_max = 0.0;
  double v_ratio_slope = 0.0;
  double mod_slope = 0.0;
  double loc_mass_slope = 0.0;
  double eta_scaled_max = 0.0;  // max |eta| t^2 / (Mod + t^4)
  double mass_drift = 0.0;
  double energy_drift = 0.0;
  double ball_drift_max = 0.0;
  std::vector<double> final_ball_rel;  // |m_k/|Q|^2 - 1| at the last sample
  double final_outside_fraction = 0.0;
  SandwichFit sandwich;
  MonotonicityReport monotonicity;
  std::array<double, 3> monotonicity_sweep{};
  CorridorReport corridors;
  double corridor_trust_fraction = 0.0;
};

struct RunOptions {
  bool write = true;
  std::ostream* log = nullptr;
};

// Q and its profile chain on the reference line grid; cached per argument set.
std::shared_ptr<const ProfileBank> reference_bank(std::size_t points, double scale, double gs_tol, double chain_tol);

RunReport run_experiment(const RunConfig& config, const RunOptions& opts = {});

// Series diagnostics over stored rows: corridors, slopes, sandwich, monotonicity, drifts.
void analyze(const RunConfig& config, RunReport& report);

std::string trajectory_header(int k);
void write_trajectory(const std::filesystem::path& path, const RunReport& report, int k);
std::vector<SampleRow> read_trajectory(const std::filesystem::path& path, int k);
void write_summary(const std::filesystem::path& path, const RunConfig& config, const RunReport& report);

struct ScheduleEntry {
  double t_start = 0.0;
  std::string hash;
  std::string termination;
  double lambda_rel_err_final = 0.0;
  double lambda_rel_err_max = 0.0;
};

std::vector<ScheduleEntry> run_schedule(const RunConfig& config, const std::vector<double>& starts,
                                        const RunOptions& opts = {});

}  // namespace hwb
