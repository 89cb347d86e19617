#include "hwb/bubbles.hpp"

#include <algorithm>
#include <cmath>

#include "hwb/error.hpp"

namespace hwb {
namespace {

const cplx I(0.0, 1.0);

void check_small(double b, double v) {
  require(std::abs(b) <= kSmallnessCeiling && std::abs(v) <= kSmallnessCeiling,
          "profile parameters (b, v) exceed the smallness ceiling");
}

}  // namespace

void BubbleParams::validate() const {
  require(std::isfinite(lambda) && lambda > 0.0, "bubble lambda must be positive");
  require(std::isfinite(b) && std::isfinite(v) && std::isfinite(alpha) && std::isfinite(gamma),
          "bubble parameters must be finite");
  check_small(b, v);
}

LineField modified_profile(const ProfileSet& p, double b, double v) {
  check_small(b, v);
  return p.q + (I * b) * p.s1 + (I * v) * p.g1 + cplx(b * v) * p.g2 + cplx(b * b) * p.s2 +
         (I * (b * b * b)) * p.s3;
}

LineField modified_profile_db(const ProfileSet& p, double b, double v) {
  return I * p.s1 + cplx(v) * p.g2 + cplx(2.0 * b) * p.s2 + (I * (3.0 * b * b)) * p.s3;
}

LineField modified_profile_dv(const ProfileSet& p, double b, double) {
  return I * p.g1 + cplx(b) * p.g2;
}

ProfileResidual profile_residual(const ProfileSet& p, double b, double v) {
  const LineField qk = modified_profile(p, b, v);
  const LineField db = modified_profile_db(p, b, v);
  const LineField dv = modified_profile_dv(p, b, v);
  CVec nl(qk.size());
  for (std::size_t j = 0; j < nl.size(); ++j) nl[j] = std::norm(qk[j]) * qk[j];
  const LineField cubic(qk.grid(), std::move(nl));
  const LineField minus_psi = (-0.5 * I * b * b) * db - (I * b * v) * dv + (I * b) * line_scaling(qk) -
                              (I * v) * line_derivative(qk) - line_half_wave(qk) - qk + cubic;
  ProfileResidual r{-1.0 * minus_psi};
  r.l2 = line_norm(r.psi);
  for (std::size_t j = 0; j < r.psi.size(); ++j) {
    const double x = r.psi.grid().node(j);
    r.weighted_sup = std::max(r.weighted_sup, (1.0 + x * x) * std::abs(r.psi[j]));
  }
  return r;
}

ProfileBank::ProfileBank(ProfileSet profiles) : profiles_(std::move(profiles)) {
  const std::array<const LineField*, kCount> src = {&profiles_.q,  &profiles_.s1, &profiles_.g1,
                                                    &profiles_.g2, &profiles_.s2, &profiles_.s3,
                                                    &profiles_.rho, &profiles_.varrho_b,
                                                    &profiles_.varrho_v};
  for (int i = 0; i < kCount; ++i) {
    tables_[i][0] = LineTable(*src[i]);
    tables_[i][1] = LineTable(line_derivative(*src[i]));
    tables_[i][2] = LineTable(line_scaling(*src[i]));
  }
}

LineTable ProfileBank::combo(std::initializer_list<std::pair<cplx, Index>> terms, Component c) const {
  LineTable out = LineTable::zeros_like(tables_[0][0]);
  for (const auto& [coef, idx] : terms) {
    if (coef != cplx(0.0)) out.axpy(coef, tables_[idx][static_cast<int>(c)]);
  }
  return out;
}

LineTable ProfileBank::modified(double b, double v, Component c) const {
  check_small(b, v);
  return combo({{1.0, kQ}, {I * b, kS1}, {I * v, kG1}, {b * v, kG2}, {b * b, kS2}, {I * (b * b * b), kS3}}, c);
}

LineTable ProfileBank::d_b(double b, double v, Component c) const {
  return combo({{I, kS1}, {v, kG2}, {2.0 * b, kS2}, {I * (3.0 * b * b), kS3}}, c);
}

LineTable ProfileBank::d_v(double b, double, Component c) const {
  return combo({{I, kG1}, {b, kG2}}, c);
}

LineTable ProfileBank::rho_k(double b, double v, Component c) const {
  return combo({{1.0, kRho}, {I * b, kVarrhoB}, {I * v, kVarrhoV}}, c);
}

namespace {

std::vector<double> frame_points(const Grid1D& grid, double lambda, double alpha) {
  std::vector<double> y(grid.size());
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = (grid.node(j) - alpha) / lambda;
  return y;
}

}  // namespace

BubbleFrame::BubbleFrame(const Grid1D& grid, const LineTable& layout, double lambda, double alpha)
    : grid_(grid), lambda_(lambda), alpha_(alpha), stencil_(layout, frame_points(grid, lambda, alpha)) {}

void BubbleFrame::render(const LineTable& f, double power, double gamma, std::span<cplx> out,
                         bool accumulate) const {
  const cplx c = std::pow(lambda_, power) * std::polar(1.0, gamma);
  stencil_.evaluate(f, c, out, accumulate);
}

SpectralField BubbleFrame::render(const LineTable& f, double power, double gamma) const {
  CVec out(grid_.size());
  render(f, power, gamma, out, false);
  return SpectralField(grid_, std::move(out));
}

void check_resolvable(const Grid1D& grid, double lambda, double min_points) {
  if (!(lambda >= min_points * grid.spacing())) {
    throw ValidationError("bubble under-resolved: lambda = " + std::to_string(lambda) +
                          " below " + std::to_string(min_points) + " grid spacings");
  }
}

SpectralField render_bubble(const Grid1D& grid, const BubbleParams& p, const ProfileBank& bank,
                            double min_points) {
  p.validate();
  check_resolvable(grid, p.lambda, min_points);
  BubbleFrame frame(grid, bank.layout(), p.lambda, p.alpha);
  return frame.render(bank.modified(p.b, p.v, Component::value), -0.5, p.gamma);
}

SpectralField multi_bubble(const Grid1D& grid, std::span<const BubbleParams> params,
                           const ProfileBank& bank, double min_points) {
  require(!params.empty(), "multi_bubble: no bubbles");
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = i + 1; k < params.size(); ++k) {
      require(params[i].alpha != params[k].alpha, "multi_bubble: centers must be distinct");
    }
  }
  CVec out(grid.size());
  for (const auto& p : params) {
    p.validate();
    check_resolvable(grid, p.lambda, min_points);
    BubbleFrame frame(grid, bank.layout(), p.lambda, p.alpha);
    frame.render(bank.modified(p.b, p.v, Component::value), -0.5, p.gamma, out, true);
  }
  return SpectralField(grid, std::move(out));
}

std::vector<BubbleParams> closed_form_params(double omega, std::span<const double> centers,
                                             std::span<const double> thetas, double t) {
  require(t < 0.0, "closed-form parameters need t < 0");
  require(omega > 0.0, "omega must be positive");
  require(centers.size() == thetas.size(), "centers and thetas differ in length");
  const double w2 = omega * omega;
  std::vector<BubbleParams> out;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    out.push_back({w2 * t * t / 4.0, -w2 * t / 2.0, w2 * t * t / 4.0, centers[k],
                   -4.0 / (w2 * t) + thetas[k]});
  }
  return out;
}

BoundaryData boundary_data(const Grid1D& grid, const ProfileBank& bank, double omega,
                           std::span<const double> centers, std::span<const double> thetas, double t,
                           double min_points) {
  auto params = closed_form_params(omega, centers, thetas, t);
  auto u = multi_bubble(grid, params, bank, min_points);
  return {u, params};
}

double smooth_step(double x, double sigma) {
  const double lo = 4.0 * sigma;
  const double hi = 8.0 * sigma;
  if (x <= lo) return 1.0;
  if (x >= hi) return 0.0;
  const double t = (x - lo) / (hi - lo);
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

double smooth_step_derivative(double x, double sigma) {
  const double lo = 4.0 * sigma;
  const double hi = 8.0 * sigma;
  if (x <= lo || x >= hi) return 0.0;
  const double t = (x - lo) / (hi - lo);
  return -30.0 * t * t * (1.0 - t) * (1.0 - t) / (hi - lo);
}

LocalizationSet localization_set(const Grid1D& grid, std::span<const double> centers,
                                 std::optional<double> sigma_override) {
  require(!centers.empty(), "localization_set: need at least one center");
  for (std::size_t k = 1; k < centers.size(); ++k) {
    require(centers[k] > centers[k - 1], "localization_set: centers must be strictly increasing");
  }
  LocalizationSet out;
  out.centers.assign(centers.begin(), centers.end());
  if (sigma_override) {
    out.sigma = *sigma_override;
  } else if (centers.size() == 1) {
    out.sigma = grid.length() / 24.0;
  } else {
    double gap = INFINITY;
    for (std::size_t k = 1; k < centers.size(); ++k) gap = std::min(gap, centers[k] - centers[k - 1]);
    out.sigma = gap / 12.0;
  }
  require(out.sigma > 0.0, "localization_set: sigma must be positive");
  require(8.0 * out.sigma >= 4.0 * grid.spacing(), "localization_set: centers too close for the grid");

  const std::size_t kk = centers.size();
  for (std::size_t k = 0; k < kk; ++k) {
    out.phi.push_back(SpectralField::from_function(grid, [&](double x) {
      if (kk == 1) return cplx(1.0);
      const double right = k + 1 < kk ? smooth_step(x - centers[k], out.sigma) : 1.0;
      const double left = k > 0 ? smooth_step(x - centers[k - 1], out.sigma) : 0.0;
      return cplx(right - left);
    }));
  }
  return out;
}

}  // namespace hwb
