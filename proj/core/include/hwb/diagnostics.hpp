#pragma once

// Functionals monitored along a trajectory: the profile error eta, localized
// mass and momentum, the generalized energy and its coercivity sandwich, the
// monotonicity trend, decoupling integrals, bootstrap corridors and ball masses.

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hwb/bubbles.hpp"
#include "hwb/evolver.hpp"
#include "hwb/modulation.hpp"

namespace hwb {

struct EtaResult {
  SpectralField eta;
  std::array<double, 3> norms{};  // |eta|, |eta'|, |eta''|
};

// eta = i dU/dt - D U + |U|^2 U, with dU/dt assembled from the parameter rates
// through the analytic parameter derivatives of each rendered bubble.
EtaResult profile_error_eta(const Grid1D& grid, std::span<const BubbleParams> params,
                            std::span<const BubbleParams> rates, const ProfileBank& bank,
                            double min_points = kMinPointsPerScale);
// Same at sample i of a series; rates by finite differences (needs three samples).
EtaResult profile_error_eta(const Grid1D& grid, const ParamSeries& series, std::size_t i,
                            const ProfileBank& bank, double min_points = kMinPointsPerScale);

// 2 Re<U_k, R> + int |R|^2 Phi_k.
double localized_mass(const SpectralField& u_k, const SpectralField& r, const SpectralField& phi_k);
// Im int u' conj(u) Phi_k.
double localized_momentum(const SpectralField& u, const SpectralField& phi_k);
// |v_k/lambda_k - 1| per sample and bubble.
std::vector<std::vector<double>> refined_v_ratio(const ParamSeries& s);

// chi' = x on [0,1], 3 - e^{-x} on [2,inf), quintic bridge in between; chi(0) = 0, chi even.
class ChiCutoff {
 public:
  explicit ChiCutoff(double a);

  double a() const { return a_; }
  // d^order/dx^order of chi_A(x) = A^2 chi(x/A), order 0..4.
  double operator()(double x, int order = 0) const;
  // Unscaled chi and its derivatives.
  double base(double x, int order) const;
  double min_second_derivative() const { return min_chi2_; }

  struct Table {
    std::array<std::vector<double>, 5> d;  // chi_A, chi_A', ..., chi_A''''
  };
  Table tabulate(std::span<const double> x) const;

 private:
  double a_;
  std::array<double, 6> c_{};  // bridge chi'(x) = sum c_i (x-1)^i
  double chi1_ = 0.5, chi2_ = 0.0;
  double min_chi2_ = 0.0;
};

struct EnergySplit {
  double total = 0.0;
  double energy_part = 0.0;
  double virial_part = 0.0;
  double split_defect = 0.0;  // |total - energy_part - virial_part|
};

// The generalized energy: 1/2 |D^1/2 R|^2 + 1/2 sum (1/lambda_k) int |R|^2 Phi_k
// - Re int F(u) - F(U) - f(U) conj(R) + sum (b_k/2) Im int (grad chi_A)(y_k) R' conj(R) Phi_k.
EnergySplit generalized_energy(const SpectralField& u, const SpectralField& big_u, const SpectralField& r,
                               std::span<const BubbleParams> params, const LocalizationSet& loc,
                               const ChiCutoff& chi);

// |D^1/2 R|^2 + t^{-2} |R|^2.
double remainder_size_x(const SpectralField& r, double t);

struct SandwichFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double min_ratio = 0.0;  // min I/X
  double max_ratio = 0.0;
  std::size_t violations = 0;
  std::size_t samples = 0;
};

// C1 is the largest constant with C1 X - C1^{-1} |t|^{6-2 delta} <= I at every sample and
// C2 the smallest with I <= C2 X.
SandwichFit sandwich_fit(std::span<const double> t, std::span<const double> x, std::span<const double> energy,
                         double delta);

struct MonotonicityOptions {
  double delta = 0.1;
  double c_mono = 0.01;  // coefficient of |R|^2/|t|^3
  double c_env = 1.0;    // coefficient of the error envelope
  double required_fraction = 0.9;
};

struct MonotonicityReport {
  std::vector<double> d_energy;
  std::vector<double> lower;     // c_mono |R|^2/|t|^3
  std::vector<double> envelope;  // sqrt(ln(2 + 1/|R|_{H^1/2})) X + |t|^{3-delta}, unscaled
  std::vector<bool> pass;
  std::vector<int> sign;
  double pass_fraction = 0.0;
  // Smallest c_env reaching the required fraction at the given c_mono.
  double fitted_c_env = 0.0;
};

MonotonicityReport monotonicity_trend(std::span<const double> t, std::span<const double> energy,
                                      std::span<const double> r_l2, std::span<const double> r_h12,
                                      std::span<const double> x, const MonotonicityOptions& opts = {});

using RealFunction = std::function<double(double)>;

struct DecouplingIntegrals {
  std::vector<double> overlap;  // int |f(x) g(x + 1/eps)|
  std::vector<double> dilated;  // int |f(x/eps)|^2 h(x)
};

DecouplingIntegrals decoupling_integrals(const RealFunction& f, const RealFunction& g, const RealFunction& h,
                                         std::span<const double> eps);

struct DecouplingReport {
  DecouplingIntegrals integrals;
  double overlap_slope = 0.0;
  double dilated_slope = 0.0;
};

// Checks that f, g decay at least like <x>^-2 and fits both log-log slopes against eps.
DecouplingReport decoupling_check(const RealFunction& f, const RealFunction& g, const RealFunction& h,
                                  std::span<const double> eps);

struct CorridorSample {
  double t = 0.0;
  double r_l2 = 0.0;
  double r_h12 = 0.0;  // |D^1/2 R|
  double r_hs = 0.0;   // |D^{1/2+varsigma} R|
  std::vector<BubbleParams> params;
};

struct CorridorTarget {
  double omega = 1.0;
  std::vector<double> centers;
  std::vector<double> thetas;
};

inline constexpr int kCorridorCount = 8;
extern const std::array<const char*, kCorridorCount> kCorridorNames;

struct CorridorReport {
  std::array<double, kCorridorCount> exponent{};
  std::array<double, kCorridorCount> constant{};
  std::array<double, kCorridorCount> slope{};
  std::array<double, kCorridorCount> fraction{};
  std::vector<std::array<bool, kCorridorCount>> flags;
  double all_pass_fraction = 0.0;
};

void validate_corridor_exponents(double delta, double varsigma);

// Each corridor |q(t)| <= C |t|^p with C fitted on the 20% of samples farthest from
// blow-up (never below 1); a sample passes when q <= 2 C |t|^p.
CorridorReport bootstrap_monitor(std::span<const CorridorSample> samples, const CorridorTarget& target,
                                 double delta, double varsigma);

struct BallMasses {
  std::vector<double> inside;
  double outside = 0.0;
};

BallMasses mass_quantization(const SpectralField& u, std::span<const double> centers, double r);

struct DiagnosticsRecord {
  double t = 0.0;
  double x = 0.0;
  EnergySplit energy;
  std::vector<double> localized_mass;
  std::vector<double> localized_momentum;
  std::array<double, 3> eta_norms{};
  double mod_sum = 0.0;
  std::vector<double> mass_in_balls;
  Conserved conserved;
  std::array<bool, kCorridorCount> corridor_flags{};
};

}  // namespace hwb
