#include "hwb/line.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "hwb/error.hpp"

namespace hwb {
namespace {

constexpr double kPi = std::numbers::pi;

void require_same(const LineField& a, const LineField& b) {
  require(a.grid() == b.grid(), "line fields live on different grids");
}

template <class Op>
LineField zip(const LineField& a, const LineField& b, Op op) {
  require_same(a, b);
  CVec out(a.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = op(a[j], b[j]);
  return LineField(a.grid(), std::move(out));
}

template <class Op>
LineField each(const LineField& a, Op op) {
  CVec out(a.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = op(a[j]);
  return LineField(a.grid(), std::move(out));
}

// d/dtheta by FFT; the Nyquist mode is dropped to keep real data real.
CVec dtheta(std::span<const cplx> f) {
  const std::size_t n = f.size();
  CVec c = fft_forward(f);
  for (std::size_t k = 0; k < n; ++k) {
    const long m = k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
    c[k] = k == n / 2 ? cplx(0.0) : c[k] * cplx(0.0, static_cast<double>(m));
  }
  fft_backward(c, c);
  for (auto& z : c) z /= static_cast<double>(n);
  return c;
}

}  // namespace

LineGrid::LineGrid(std::size_t n_points, double scale) : n_(n_points), scale_(scale) {
  require(n_points >= 16 && (n_points & (n_points - 1)) == 0,
          "line grid size must be a power of two >= 16");
  require(std::isfinite(scale) && scale > 0.0, "line grid scale must be positive");
  theta_.resize(n_);
  x_.resize(n_);
  w_.resize(n_);
  const double dth = 2.0 * kPi / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    const double th = -kPi + (static_cast<double>(j) + 0.5) * dth;
    theta_[j] = th;
    x_[j] = scale_ * std::tan(0.5 * th);
    w_[j] = scale_ / (1.0 + std::cos(th)) * dth;
  }
}

LineField::LineField(LineGrid grid, CVec values) : grid_(std::move(grid)), values_(std::move(values)) {
  require(values_.size() == grid_.size(), "line field size does not match grid");
}

LineField LineField::zeros(const LineGrid& grid) { return LineField(grid, CVec(grid.size())); }

LineField LineField::from_function(const LineGrid& grid, const std::function<cplx(double)>& f) {
  CVec v(grid.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.node(j));
  return LineField(grid, std::move(v));
}

LineField operator+(const LineField& a, const LineField& b) { return zip(a, b, std::plus<>()); }
LineField operator-(const LineField& a, const LineField& b) { return zip(a, b, std::minus<>()); }
LineField operator*(const LineField& a, const LineField& b) { return zip(a, b, std::multiplies<>()); }
LineField operator*(cplx c, const LineField& a) {
  return each(a, [c](cplx z) { return c * z; });
}
LineField real_part(const LineField& a) {
  return each(a, [](cplx z) { return cplx(z.real(), 0.0); });
}
LineField imag_part(const LineField& a) {
  return each(a, [](cplx z) { return cplx(z.imag(), 0.0); });
}
LineField conj(const LineField& a) {
  return each(a, [](cplx z) { return std::conj(z); });
}

LineField reflect(const LineField& a) {
  CVec out(a.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = a[a.grid().mirror(j)];
  return LineField(a.grid(), std::move(out));
}

LineField symmetrize(const LineField& a, Parity p) {
  const double s = p == Parity::even ? 1.0 : -1.0;
  CVec out(a.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = 0.5 * (a[j] + s * a[a.grid().mirror(j)]);
  return LineField(a.grid(), std::move(out));
}

LineField line_derivative(const LineField& f) {
  const auto& g = f.grid();
  CVec d = dtheta(f.values());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] *= (1.0 + std::cos(g.theta(j))) / g.scale();
  return LineField(g, std::move(d));
}

LineField line_hilbert(const LineField& f) {
  // (1 - i x/l) f is a Fourier series in theta whose positive modes are the
  // upper-half-plane analytic part; H multiplies by -i sgn, then undo the weight.
  const auto& g = f.grid();
  const std::size_t n = g.size();
  CVec c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = cplx(1.0, -g.node(j) / g.scale()) * f[j];
  fft_forward(c, c);
  for (std::size_t k = 0; k < n; ++k) c[k] *= k < n / 2 ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
  fft_backward(c, c);
  for (std::size_t j = 0; j < n; ++j) {
    c[j] /= static_cast<double>(n) * cplx(1.0, -g.node(j) / g.scale());
  }
  return LineField(g, std::move(c));
}

LineField line_half_wave(const LineField& f) { return line_hilbert(line_derivative(f)); }

LineField line_scaling(const LineField& f) {
  const auto& g = f.grid();
  CVec d = dtheta(f.values());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = 0.5 * f[j] + std::sin(g.theta(j)) * d[j];
  return LineField(g, std::move(d));
}

cplx weighted_dot(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> w) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * std::conj(b[j]) * w[j];
  return acc;
}

cplx line_inner(const LineField& f, const LineField& g) {
  require_same(f, g);
  return weighted_dot(f.values(), g.values(), f.grid().weights());
}

double line_norm(const LineField& f) { return std::sqrt(std::max(0.0, line_inner(f, f).real())); }

double line_sup(const LineField& f) {
  double m = 0.0;
  for (auto z : f.values()) m = std::max(m, std::abs(z));
  return m;
}

LineTable::LineTable(const LineField& f) {
  const auto& g = f.grid();
  const std::size_t n = g.size();
  const std::size_t m = n * kOversample;
  scale_ = g.scale();
  theta0_ = g.theta(0);
  CVec c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = cplx(1.0, -g.node(j) / g.scale()) * f[j];
  fft_forward(c, c);
  CVec pad(m);
  for (std::size_t k = 0; k < n / 2; ++k) pad[k] = c[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) pad[m - n + k] = c[k];
  pad[n / 2] = 0.5 * c[n / 2];
  pad[m - n / 2] = 0.5 * c[n / 2];
  fft_backward(pad, pad);
  for (auto& z : pad) z /= static_cast<double>(n);
  g_ = std::move(pad);
}

LineTable LineTable::zeros_like(const LineTable& t) {
  LineTable z;
  z.scale_ = t.scale_;
  z.theta0_ = t.theta0_;
  z.g_.assign(t.g_.size(), cplx(0.0));
  return z;
}

LineTable& LineTable::axpy(cplx a, const LineTable& x) {
  require(x.g_.size() == g_.size() && x.scale_ == scale_, "line tables differ in layout");
  for (std::size_t i = 0; i < g_.size(); ++i) g_[i] += a * x.g_[i];
  return *this;
}

cplx LineTable::operator()(double y) const {
  const double pts[1] = {y};
  LineStencil st(*this, pts);
  cplx out[1];
  st.evaluate(*this, 1.0, out, false);
  return out[0];
}

LineStencil::LineStencil(const LineTable& layout, std::span<const double> y) : m_(layout.size()) {
  constexpr int p = kPoints;
  // Barycentric weights for equispaced nodes: (-1)^i binom(p-1, i).
  std::array<double, p> bw{};
  {
    double c = 1.0;
    for (int i = 0; i < p; ++i) {
      bw[i] = (i % 2 == 0 ? 1.0 : -1.0) * c;
      c = c * (p - 1 - i) / (i + 1);
    }
  }
  const double dth = 2.0 * kPi / static_cast<double>(m_);
  base_.resize(y.size());
  weights_.resize(y.size() * p);
  factor_.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double s = y[i] / layout.scale();
    const double th = 2.0 * std::atan(s);
    double t = (th - layout.theta0()) / dth;
    const double fl = std::floor(t);
    const long start = static_cast<long>(fl) - (p / 2 - 1);
    const double local = t - static_cast<double>(start);
    double* wi = &weights_[i * p];
    double total = 0.0;
    int exact = -1;
    for (int k = 0; k < p; ++k) {
      const double d = local - k;
      if (d == 0.0) exact = k;
      wi[k] = exact < 0 ? bw[k] / d : 0.0;
      total += wi[k];
    }
    if (exact >= 0) {
      std::fill(wi, wi + p, 0.0);
      wi[exact] = 1.0;
    } else {
      for (int k = 0; k < p; ++k) wi[k] /= total;
    }
    const long mm = static_cast<long>(m_);
    base_[i] = static_cast<std::size_t>(((start % mm) + mm) % mm);
    factor_[i] = 1.0 / cplx(1.0, -s);
  }
}

void LineStencil::evaluate(const LineTable& t, cplx c, std::span<cplx> out, bool accumulate) const {
  require(t.size() == m_, "stencil and table layouts differ");
  require(out.size() == base_.size(), "stencil output size mismatch");
  constexpr int p = kPoints;
  const cplx* g = t.samples().data();
  for (std::size_t i = 0; i < base_.size(); ++i) {
    const double* wi = &weights_[i * p];
    std::size_t b = base_[i];
    cplx acc = 0.0;
    if (b + p <= m_) {
      for (int k = 0; k < p; ++k) acc += wi[k] * g[b + k];
    } else {
      for (int k = 0; k < p; ++k) acc += wi[k] * g[(b + k) % m_];
    }
    const cplx v = c * acc * factor_[i];
    out[i] = accumulate ? out[i] + v : v;
  }
}

}  // namespace hwb
