#include "hwb/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hwb/error.hpp"

namespace hwb {

Grid1D::Grid1D(std::size_t n_points, double length) : n_(n_points), length_(length) {
  require(n_points >= 16 && (n_points & (n_points - 1)) == 0,
          "grid n_points must be a power of two >= 16");
  require(std::isfinite(length) && length > 0.0, "grid length must be positive and finite");
}

long Grid1D::mode(std::size_t j) const {
  const long n = static_cast<long>(n_);
  const long k = static_cast<long>(j);
  return k < n / 2 ? k : k - n;
}

double Grid1D::wavenumber(std::size_t j) const {
  return 2.0 * std::numbers::pi * static_cast<double>(mode(j)) / length_;
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> x(n_);
  for (std::size_t j = 0; j < n_; ++j) x[j] = node(j);
  return x;
}

SpectralField::SpectralField(Grid1D grid, CVec values)
    : grid_(grid), cache_(std::make_shared<Cache>()) {
  require(values.size() == grid.size(), "field size does not match grid");
  values_ = std::make_shared<const CVec>(std::move(values));
}

SpectralField SpectralField::zeros(const Grid1D& grid) {
  return SpectralField(grid, CVec(grid.size()));
}

SpectralField SpectralField::from_spectrum(const Grid1D& grid, CVec spectrum) {
  require(spectrum.size() == grid.size(), "spectrum size does not match grid");
  CVec v = fft_backward(spectrum);
  const double inv = 1.0 / static_cast<double>(grid.size());
  for (auto& z : v) z *= inv;
  SpectralField f(grid, std::move(v));
  std::call_once(f.cache_->once, [&] { f.cache_->spectrum = std::move(spectrum); });
  return f;
}

SpectralField SpectralField::from_function(const Grid1D& grid,
                                           const std::function<cplx(double)>& f) {
  CVec v(grid.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.node(j));
  return SpectralField(grid, std::move(v));
}

std::span<const cplx> SpectralField::spectrum() const {
  std::call_once(cache_->once, [this] { cache_->spectrum = fft_forward(*values_); });
  return cache_->spectrum;
}

void require_same_grid(const SpectralField& a, const SpectralField& b) {
  require(a.grid() == b.grid(), "fields live on different grids");
}

namespace {

template <class Op>
SpectralField zip(const SpectralField& a, const SpectralField& b, Op op) {
  require_same_grid(a, b);
  CVec out(a.size());
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = op(va[j], vb[j]);
  return SpectralField(a.grid(), std::move(out));
}

}  // namespace

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  return zip(a, b, std::plus<>());
}
SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  return zip(a, b, std::minus<>());
}
SpectralField operator*(const SpectralField& a, const SpectralField& b) {
  return zip(a, b, std::multiplies<>());
}
SpectralField operator*(cplx c, const SpectralField& a) {
  return map(a, [c](cplx z, double) { return c * z; });
}
SpectralField conj(const SpectralField& a) {
  return map(a, [](cplx z, double) { return std::conj(z); });
}
SpectralField real_part(const SpectralField& a) {
  return map(a, [](cplx z, double) { return cplx(z.real(), 0.0); });
}
SpectralField imag_part(const SpectralField& a) {
  return map(a, [](cplx z, double) { return cplx(z.imag(), 0.0); });
}

SpectralField map(const SpectralField& a, const std::function<cplx(cplx, double)>& f) {
  CVec out(a.size());
  auto v = a.values();
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = f(v[j], a.grid().node(j));
  return SpectralField(a.grid(), std::move(out));
}

SpectralField apply_multiplier(const SpectralField& f, const std::function<cplx(double)>& m) {
  auto spec = f.spectrum();
  CVec out(spec.begin(), spec.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= m(f.grid().wavenumber(j));
  return SpectralField::from_spectrum(f.grid(), std::move(out));
}

SpectralField fractional_laplacian(const SpectralField& f, double s) {
  require(std::isfinite(s) && s >= 0.0, "fractional_laplacian: order must be finite and >= 0");
  if (s == 0.0) return f;
  return apply_multiplier(f, [s](double xi) { return cplx(std::pow(std::abs(xi), s), 0.0); });
}

SpectralField derivative(const SpectralField& f) {
  const auto& g = f.grid();
  auto spec = f.spectrum();
  CVec out(spec.begin(), spec.end());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = j == g.size() / 2 ? cplx(0.0) : out[j] * cplx(0.0, g.wavenumber(j));
  }
  return SpectralField::from_spectrum(g, std::move(out));
}

SpectralField scaling_operator(const SpectralField& f) {
  auto df = derivative(f);
  CVec out(f.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = 0.5 * f[j] + f.grid().node(j) * df[j];
  return SpectralField(f.grid(), std::move(out));
}

cplx fractional_laplacian_pointwise(const SpectralField& f, double s, std::size_t node) {
  require(s > 0.0 && s < 1.0, "fractional_laplacian_pointwise: s must lie in (0,1)");
  const auto& g = f.grid();
  require(node < g.size(), "fractional_laplacian_pointwise: node out of range");
  const std::size_t n = g.size();
  const double h = g.spacing();
  const double len = g.length();
  auto v = f.values();
  const cplx f0 = v[node];

  // C(s) = (int (1 - cos y)/|y|^{1+2s} dy)^{-1} = Gamma(1+2s) sin(pi s) / pi.
  const double pi = std::numbers::pi;
  const double c_s = std::tgamma(1.0 + 2.0 * s) * std::sin(pi * s) / pi;
  const double p = 1.0 + 2.0 * s;

  // Periodic field: int_0^inf G(y) y^-p dy = 1/2 int_0^L G(y) K(y) dy with the
  // periodized kernel K(y) = sum_k |y + kL|^-p and G(y) = f(x+y) + f(x-y) - 2 f(x).
  constexpr int kImages = 32;
  auto kernel = [&](double y) {
    double k = std::pow(y, -p) + std::pow(len - y, -p);
    for (int m = 1; m <= kImages; ++m) k += std::pow(m * len + y, -p) + std::pow((m + 1) * len - y, -p);
    // Midpoint rule for the remaining images.
    const double far = (kImages + 0.5) * len;
    return k + (std::pow(far + y, 1.0 - p) + std::pow(far + len - y, 1.0 - p)) / (len * (p - 1.0));
  };
  const long nl = static_cast<long>(n);
  const long j0 = static_cast<long>(node);
  auto at = [&](long k) { return v[static_cast<std::size_t>(((k % nl) + nl) % nl)]; };
  cplx sum = 0.0;
  for (long m = 1; m < nl; ++m) sum += (at(j0 + m) + at(j0 - m) - 2.0 * f0) * kernel(static_cast<double>(m) * h);

  // The trapezoid sum misses the y^{1-2s} singularity at y = 0 and y = L.
  // Generalized Euler-Maclaurin terms with G(y)/y^2 = f2 + f4 y^2 / 12 + ...
  const double beta = 1.0 - 2.0 * s;
  const cplx f2 = apply_multiplier(f, [](double xi) { return cplx(-xi * xi); })[node];
  const cplx f4 = apply_multiplier(f, [](double xi) { return cplx(xi * xi * xi * xi); })[node];
  const cplx corr = std::riemann_zeta(-beta) * f2 * std::pow(h, 1.0 + beta) +
                    std::riemann_zeta(-beta - 2.0) * (f4 / 12.0) * std::pow(h, 3.0 + beta);
  return -c_s * 0.5 * (h * sum - 2.0 * corr);
}

cplx inner_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g);
  auto a = f.values();
  auto b = g.values();
  cplx acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * std::conj(b[j]);
  return acc * f.grid().spacing();
}

double l2_norm(const SpectralField& f) { return std::sqrt(std::max(0.0, inner_product(f, f).real())); }

double linf_norm(const SpectralField& f) {
  double m = 0.0;
  for (auto z : f.values()) m = std::max(m, std::abs(z));
  return m;
}

double sobolev_norm(const SpectralField& f, double s, bool homogeneous) {
  const auto& g = f.grid();
  auto spec = f.spectrum();
  double hom = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    hom += std::pow(std::abs(g.wavenumber(j)), 2.0 * s) * std::norm(spec[j]);
  }
  const double n = static_cast<double>(g.size());
  hom *= g.length() / (n * n);
  if (homogeneous) return std::sqrt(hom);
  const double l2 = inner_product(f, f).real();
  return std::sqrt(l2 + hom);
}

double calderon_defect(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g);
  const double gn = l2_norm(g);
  const double df = linf_norm(derivative(f));
  if (gn == 0.0 || df == 0.0) return 0.0;
  auto commutator = fractional_laplacian(f * g, 1.0) - f * fractional_laplacian(g, 1.0);
  return l2_norm(commutator) / (df * gn);
}

double tail_mass_fraction(const SpectralField& f, double window_fraction) {
  const auto& g = f.grid();
  const double edge = 0.5 * g.length() * (1.0 - 2.0 * window_fraction);
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double m = std::norm(f[j]);
    total += m;
    if (std::abs(g.node(j)) >= edge) tail += m;
  }
  return total > 0.0 ? tail / total : 0.0;
}

double nyquist_mass_fraction(const SpectralField& f) {
  const auto& g = f.grid();
  auto spec = f.spectrum();
  const long cut = static_cast<long>(g.size() / 2 - g.size() / 16);
  double total = 0.0;
  double band = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double m = std::norm(spec[j]);
    total += m;
    if (std::labs(g.mode(j)) >= cut) band += m;
  }
  return total > 0.0 ? band / total : 0.0;
}

SpectralField reflect(const SpectralField& f) {
  CVec out(f.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = f[f.grid().mirror(j)];
  return SpectralField(f.grid(), std::move(out));
}

}  // namespace hwb
