#pragma once

// Small numerical kernels shared across modules.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hwb/fft.hpp"

namespace hwb {

using LinearOp = std::function<CVec(std::span<const cplx>)>;
using InnerProduct = std::function<cplx(std::span<const cplx>, std::span<const cplx>)>;

struct KrylovResult {
  CVec x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Conjugate gradients for an operator positive definite in the given inner product.
KrylovResult conjugate_gradient(const LinearOp& a, std::span<const cplx> rhs, const InnerProduct& dot,
                                double tol, int max_iter);

// MINRES (Paige-Saunders) for an operator self-adjoint in the given inner product.
KrylovResult minres(const LinearOp& a, std::span<const cplx> rhs, const InnerProduct& dot, double tol,
                    int max_iter);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

// Least-squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);
// Fit of log|q| against log|t|, skipping non-finite or zero entries.
LineFit fit_loglog(std::span<const double> t, std::span<const double> q);

// Finite-difference weights for the derivative of order `order` at x0 from nodes x.
std::vector<double> fornberg_weights(double x0, std::span<const double> x, int order);

// First derivative of a sampled series; 5-point stencils, one-sided near the ends.
std::vector<double> differentiate_series(std::span<const double> t, std::span<const double> f);

}  // namespace hwb
