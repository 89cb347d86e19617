#pragma once

// Modified profiles Q_k(b, v), their residual Psi, rendered bubbles on the
// simulation grid, boundary data and the localization partition.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "hwb/line.hpp"
#include "hwb/linearized.hpp"
#include "hwb/spectral.hpp"

namespace hwb {

// Default resolvability: the bubble scale must span this many grid cells.
inline constexpr double kMinPointsPerScale = 16.0;
inline constexpr double kSmallnessCeiling = 0.5;

struct BubbleParams {
  double lambda = 1.0;
  double b = 0.0;
  double v = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;

  void validate() const;
};

// Q + i b S1 + i v G1 + b v G2 + b^2 S2 + i b^3 S3.
LineField modified_profile(const ProfileSet& p, double b, double v);
// i S1 + v G2 + 2 b S2 + 3 i b^2 S3.
LineField modified_profile_db(const ProfileSet& p, double b, double v);
// i G1 + b G2.
LineField modified_profile_dv(const ProfileSet& p, double b, double v);

struct ProfileResidual {
  LineField psi;
  double l2 = 0.0;
  double weighted_sup = 0.0;  // sup <x>^2 |Psi|
};

ProfileResidual profile_residual(const ProfileSet& p, double b, double v);

// Which function of a profile a table holds: f, f', or Lambda f.
enum class Component { value = 0, derivative = 1, scaling = 2 };

// Interpolation tables for every profile and the derived combinations the
// decomposition needs. Building it is the only expensive step; lookups are linear
// combinations of precomputed tables.
class ProfileBank {
 public:
  explicit ProfileBank(ProfileSet profiles);

  const ProfileSet& profiles() const { return profiles_; }
  const LineTable& layout() const { return tables_[0][0]; }

  LineTable modified(double b, double v, Component c) const;
  LineTable d_b(double b, double v, Component c) const;
  LineTable d_v(double b, double v, Component c) const;
  // rho + i varrho(b, v).
  LineTable rho_k(double b, double v, Component c) const;
  const LineTable& s1(Component c) const { return tables_[kS1][static_cast<int>(c)]; }
  const LineTable& g1(Component c) const { return tables_[kG1][static_cast<int>(c)]; }
  const LineTable& q(Component c) const { return tables_[kQ][static_cast<int>(c)]; }

 private:
  enum Index { kQ, kS1, kG1, kG2, kS2, kS3, kRho, kVarrhoB, kVarrhoV, kCount };
  LineTable combo(std::initializer_list<std::pair<cplx, Index>> terms, Component c) const;

  ProfileSet profiles_;
  std::array<std::array<LineTable, 3>, kCount> tables_;
};

// Interpolation stencil for y = (x - alpha)/lambda over a torus grid.
class BubbleFrame {
 public:
  BubbleFrame(const Grid1D& grid, const LineTable& layout, double lambda, double alpha);

  // lambda^power e^{i gamma} f(y) sampled on the grid, added to out when accumulate is set.
  void render(const LineTable& f, double power, double gamma, std::span<cplx> out,
              bool accumulate = false) const;
  SpectralField render(const LineTable& f, double power, double gamma) const;

  const Grid1D& grid() const { return grid_; }
  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }

 private:
  Grid1D grid_;
  double lambda_, alpha_;
  LineStencil stencil_;
};

void check_resolvable(const Grid1D& grid, double lambda, double min_points = kMinPointsPerScale);

// U_k = lambda^{-1/2} Q_k((x - alpha)/lambda) e^{i gamma}.
SpectralField render_bubble(const Grid1D& grid, const BubbleParams& p, const ProfileBank& bank,
                            double min_points = kMinPointsPerScale);
SpectralField multi_bubble(const Grid1D& grid, std::span<const BubbleParams> params,
                           const ProfileBank& bank, double min_points = kMinPointsPerScale);

// (omega^2 t^2/4, -omega^2 t/2, omega^2 t^2/4, x_k, -4/(omega^2 t) + theta_k).
std::vector<BubbleParams> closed_form_params(double omega, std::span<const double> centers,
                                             std::span<const double> thetas, double t);

struct BoundaryData {
  SpectralField u;
  std::vector<BubbleParams> params;
};

BoundaryData boundary_data(const Grid1D& grid, const ProfileBank& bank, double omega,
                           std::span<const double> centers, std::span<const double> thetas, double t,
                           double min_points = kMinPointsPerScale);

// Smooth step: 1 for x <= 4 sigma, 0 for x >= 8 sigma, quintic in between.
double smooth_step(double x, double sigma);
double smooth_step_derivative(double x, double sigma);

struct LocalizationSet {
  double sigma = 0.0;
  std::vector<double> centers;
  std::vector<SpectralField> phi;
};

LocalizationSet localization_set(const Grid1D& grid, std::span<const double> centers,
                                 std::optional<double> sigma_override = std::nullopt);

}  // namespace hwb
