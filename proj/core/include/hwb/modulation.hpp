#pragma once

// Geometric decomposition u = sum U_k + R and the modulation equations.

#include <span>
#include <vector>

#include "hwb/bubbles.hpp"

namespace hwb {

struct DecompositionResult {
  std::vector<BubbleParams> params;
  SpectralField remainder;
  // 5K orthogonality values per bubble in the order (S1, G1, grad U, Lambda U, rho),
  // each divided by |direction| * |R| (or by |direction| * |u| when R vanishes).
  std::vector<double> ortho_residuals{};
  int newton_iters = 0;
  std::vector<SpectralField> localized_remainders{};  // R * Phi_k when a partition is supplied
};

struct DecomposeOptions {
  double tol = 1e-13;
  int max_newton = 20;
  double min_points = kMinPointsPerScale;
  const LocalizationSet* localization = nullptr;
};

DecompositionResult decompose(const SpectralField& u, std::span<const BubbleParams> guess,
                              const ProfileBank& bank, const DecomposeOptions& opts = {});

// The five orthogonality directions of one bubble at parameters p.
struct BubbleDirections {
  SpectralField bubble;
  std::array<SpectralField, 5> dirs;
};
BubbleDirections bubble_directions(const Grid1D& grid, const BubbleParams& p, const ProfileBank& bank);

struct ModSample {
  double t = 0.0;
  // Per bubble: |lambda' + b|, |lambda b' + b^2/2|, |alpha' - v|, |lambda v' + b v|, |lambda gamma' - 1|.
  std::vector<std::array<double, 5>> terms;
  std::vector<double> per_bubble;
  double total = 0.0;
};

struct ParamSeries {
  std::vector<double> t;
  std::vector<std::vector<BubbleParams>> params;  // params[i][k]
};

// Time derivatives of every parameter by 5-point finite differences.
std::vector<std::vector<BubbleParams>> param_rates(const ParamSeries& s);
std::vector<ModSample> mod_vector(const ParamSeries& s);

// Thm-style normalization lambda = omega_thm t^2 corresponds to omega = 2 sqrt(omega_thm) here.
double omega_from_theorem_convention(double omega_thm);

// Classical RK4 on lambda' = -b, b' = -b^2/(2 lambda), alpha' = v, v' = -b v/lambda, gamma' = 1/lambda.
ParamSeries integrate_param_ode(std::span<const BubbleParams> initial, double t0, double t1, double dt);

// eps(y) = lambda^{1/2} R(lambda y + alpha) e^{-i gamma} on the line grid; zero outside the torus window.
LineField renormalized_remainder(const SpectralField& r, const BubbleParams& p, const LineGrid& line);

// Band-limited evaluation of a torus field at arbitrary points.
CVec evaluate_trig(const SpectralField& f, std::span<const double> x);

}  // namespace hwb
