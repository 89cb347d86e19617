#pragma once

// Run configuration: JSON schema, defaults, validation and the content hash that
// names each run's output directory.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hwb {

struct Tolerances {
  double ground_state = 1e-12;  // Petviashvili stopping tolerance
  double chain = 1e-11;         // profile-chain solves
  double newton = 1e-13;        // decomposition
  double lambda_rel = 0.05;
  double alpha_abs = 1e-2;
  double slope_min = 3.5;        // Mod and localized-mass trend slopes
  double v_ratio_slope_min = 1.5;
  double ball_mass_rel = 0.03;
  double mass_drift = 1e-8;
  double energy_drift = 1e-6;
  double monotonicity_fraction = 0.9;
  double corridor_fraction = 0.9;
};

struct RunConfig {
  int K = 1;
  double omega = 1.0;
  std::vector<double> centers;
  std::vector<double> thetas;
  double t_start = -0.4;
  double t_stop = -0.1;
  std::size_t n_points = 4096;
  double length = 200.0;
  double dt_factor = 0.02;
  double dt_max = 1e-3;
  long observer_stride = 10;
  int observations = 61;        // samples spaced uniformly in 1/|t|, ends included
  int checkpoint_every = 20;    // observations between checkpoints; 0 keeps only the last
  int trust_trim = 2;           // samples dropped at each end of the trust window
  double A_virial = 50.0;
  double delta = 0.1;
  double varsigma = 0.2;
  double ball_radius = 1.0;
  double min_points_per_scale = 16.0;
  std::size_t reference_points = 1024;
  double reference_scale = 1.0;
  double mono_c = 0.01;
  double mono_env = 1.0;
  std::string nonlinearity = "focusing";
  Tolerances tolerances;
  std::string output_dir = "runs";
  std::uint64_t seed = 0;

  bool backward() const { return t_stop < t_start; }
};

// Throws ValidationError naming the offending field.
RunConfig parse_config_json(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);
void validate(const RunConfig& c);

// Every field, defaults included, as pretty JSON; parses back to the same config.
std::string config_echo(const RunConfig& c);
// SHA-256 of the canonical echo without output_dir, hex.
std::string config_hash(const RunConfig& c);

}  // namespace hwb
