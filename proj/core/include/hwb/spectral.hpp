#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <span>

#include "hwb/fft.hpp"

namespace hwb {

// Uniform periodic grid on [-length/2, length/2).
class Grid1D {
 public:
  Grid1D(std::size_t n_points, double length);

  std::size_t size() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(n_); }
  double node(std::size_t j) const { return -0.5 * length_ + static_cast<double>(j) * spacing(); }
  // Signed integer mode of FFT slot j, in [-n/2, n/2).
  long mode(std::size_t j) const;
  double wavenumber(std::size_t j) const;
  // Index of the node at -x_j.
  std::size_t mirror(std::size_t j) const { return (n_ - j) % n_; }
  std::vector<double> nodes() const;

  bool operator==(const Grid1D& o) const { return n_ == o.n_ && length_ == o.length_; }

 private:
  std::size_t n_;
  double length_;
};

// Immutable samples on a Grid1D with a lazily computed, shared spectrum.
// Copies share both the samples and the spectrum cache.
class SpectralField {
 public:
  SpectralField(Grid1D grid, CVec values);

  static SpectralField zeros(const Grid1D& grid);
  static SpectralField from_spectrum(const Grid1D& grid, CVec spectrum);
  static SpectralField from_function(const Grid1D& grid, const std::function<cplx(double)>& f);

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  std::span<const cplx> values() const { return *values_; }
  cplx operator[](std::size_t j) const { return (*values_)[j]; }
  // Unnormalized DFT of the samples (slot order, see Grid1D::mode).
  std::span<const cplx> spectrum() const;

 private:
  struct Cache {
    std::once_flag once;
    CVec spectrum;
  };

  Grid1D grid_;
  std::shared_ptr<const CVec> values_;
  std::shared_ptr<Cache> cache_;
};

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(const SpectralField& a, const SpectralField& b);
SpectralField operator*(cplx c, const SpectralField& a);
SpectralField conj(const SpectralField& a);
SpectralField real_part(const SpectralField& a);
SpectralField imag_part(const SpectralField& a);
SpectralField map(const SpectralField& a, const std::function<cplx(cplx, double)>& f);
void require_same_grid(const SpectralField& a, const SpectralField& b);

// Fourier multiplier m(xi) applied to f.
SpectralField apply_multiplier(const SpectralField& f, const std::function<cplx(double)>& m);

// D^s with symbol |xi|^s; s = 1 is the half-wave operator D.
SpectralField fractional_laplacian(const SpectralField& f, double s);
// (-Delta)^s f(x_j) from the principal-value integral, symbol |xi|^{2s}, s in (0,1).
cplx fractional_laplacian_pointwise(const SpectralField& f, double s, std::size_t node);
// Multiplier i*xi, Nyquist mode dropped so real fields stay real.
SpectralField derivative(const SpectralField& f);
// f/2 + x f'.
SpectralField scaling_operator(const SpectralField& f);

// <f, g> = int f conj(g).
cplx inner_product(const SpectralField& f, const SpectralField& g);
double l2_norm(const SpectralField& f);
double linf_norm(const SpectralField& f);
// (|f|^2 + |D^s f|^2)^{1/2}, or |D^s f| alone when homogeneous.
double sobolev_norm(const SpectralField& f, double s, bool homogeneous = false);
// |D(fg) - f Dg| / (|f'|_inf |g|).
double calderon_defect(const SpectralField& f, const SpectralField& g);

// Fraction of |f|^2 carried by the outer window_fraction of the domain on each side.
double tail_mass_fraction(const SpectralField& f, double window_fraction = 0.1);
// Fraction of spectral energy with |m| >= n/2 - n/16.
double nyquist_mass_fraction(const SpectralField& f);

SpectralField reflect(const SpectralField& f);

}  // namespace hwb
