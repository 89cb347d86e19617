#pragma once

// Functions on the whole real line in the rational (Malmquist-Takenaka) basis.
// Nodes x_j = scale*tan(theta_j/2) with theta_j = -pi + (j + 1/2) 2 pi/n.
// Algebraically decaying profiles are represented to near machine precision,
// which a finite torus cannot do for x^-2 tails.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hwb/fft.hpp"

namespace hwb {

class LineGrid {
 public:
  LineGrid(std::size_t n_points, double scale);

  std::size_t size() const { return n_; }
  double scale() const { return scale_; }
  double theta(std::size_t j) const { return theta_[j]; }
  double node(std::size_t j) const { return x_[j]; }
  double weight(std::size_t j) const { return w_[j]; }
  std::span<const double> nodes() const { return x_; }
  std::span<const double> weights() const { return w_; }
  std::size_t mirror(std::size_t j) const { return n_ - 1 - j; }

  bool operator==(const LineGrid& o) const { return n_ == o.n_ && scale_ == o.scale_; }

 private:
  std::size_t n_;
  double scale_;
  std::vector<double> theta_, x_, w_;
};

enum class Parity { even, odd };

class LineField {
 public:
  LineField(LineGrid grid, CVec values);

  static LineField zeros(const LineGrid& grid);
  static LineField from_function(const LineGrid& grid, const std::function<cplx(double)>& f);

  const LineGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const cplx> values() const { return values_; }
  cplx operator[](std::size_t j) const { return values_[j]; }

 private:
  LineGrid grid_;
  CVec values_;
};

LineField operator+(const LineField& a, const LineField& b);
LineField operator-(const LineField& a, const LineField& b);
LineField operator*(const LineField& a, const LineField& b);
LineField operator*(cplx c, const LineField& a);
LineField real_part(const LineField& a);
LineField imag_part(const LineField& a);
LineField conj(const LineField& a);
// Even or odd part under x -> -x.
LineField symmetrize(const LineField& a, Parity p);
LineField reflect(const LineField& a);

LineField line_derivative(const LineField& f);
// Half-wave operator D = H d/dx (symbol |xi|).
LineField line_half_wave(const LineField& f);
LineField line_hilbert(const LineField& f);
// f/2 + x f'.
LineField line_scaling(const LineField& f);

cplx line_inner(const LineField& f, const LineField& g);
double line_norm(const LineField& f);
double line_sup(const LineField& f);

// Weighted view used by the Krylov solvers: <a, b>_w = sum a conj(b) w.
cplx weighted_dot(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> w);

// Oversampled table of g(theta) = (1 - i x/scale) f(x) on a uniform theta grid.
// Tables of the same grid combine linearly, so a modified profile is one table.
class LineTable {
 public:
  static constexpr int kOversample = 16;

  LineTable() = default;
  explicit LineTable(const LineField& f);

  std::size_t size() const { return g_.size(); }
  double scale() const { return scale_; }
  double theta0() const { return theta0_; }
  std::span<const cplx> samples() const { return g_; }

  LineTable& axpy(cplx a, const LineTable& x);
  static LineTable zeros_like(const LineTable& t);

  // Direct evaluation at one point (stencil built on the fly).
  cplx operator()(double y) const;

 private:
  double scale_ = 1.0;
  double theta0_ = 0.0;
  CVec g_;
};

// Local Lagrange interpolation weights in theta for a fixed set of points,
// reusable across every table of the same line grid.
class LineStencil {
 public:
  static constexpr int kPoints = 12;

  LineStencil(const LineTable& layout, std::span<const double> y);

  std::size_t size() const { return base_.size(); }
  // out[i] (+)= c * f(y_i).
  void evaluate(const LineTable& t, cplx c, std::span<cplx> out, bool accumulate) const;

 private:
  std::size_t m_ = 0;
  std::vector<std::size_t> base_;
  std::vector<double> weights_;
  CVec factor_;
};

}  // namespace hwb
