#pragma once

// Ground state Q of DQ + Q - Q^p = 0 by spectral renormalization
// (Petviashvili) iteration, on the torus or on the whole line.

#include <span>
#include <vector>

#include "hwb/line.hpp"
#include "hwb/numerics.hpp"
#include "hwb/spectral.hpp"

namespace hwb {

struct DecayFit {
  double exponent = 0.0;   // magnitude of the log-log slope
  double prefactor = 0.0;  // q(x) ~ prefactor * x^-exponent
  double lo = 0.0, hi = 0.0;
  double max_log_residual = 0.0;
};

struct PeriodicGroundState {
  SpectralField q;
  double residual_l2 = 0.0;
  int iterations = 0;
  int power = 3;
  std::vector<double> residual_history{};
};

struct GroundState {
  LineField q;
  double residual_l2 = 0.0;
  int iterations = 0;
  int power = 3;
  double mass = 0.0;  // |Q|^2
  DecayFit decay_fit{};
  std::vector<double> residual_history{};
};

// Initial iterate amplitude * 2/(1 + x^2); tol bounds the successive-iterate distance.
PeriodicGroundState solve_ground_state(const Grid1D& grid, int power, double tol, int max_iter,
                                       double amplitude = 1.0);
GroundState solve_ground_state(const LineGrid& grid, int power, double tol, int max_iter,
                               double amplitude = 1.0);

// Least-squares fit of log q against log x on [lo, hi]. Rejects non-algebraic
// decay (curved log-log data) and non-positive samples.
DecayFit fit_decay(std::span<const double> x, std::span<const double> q, double lo, double hi);
DecayFit decay_exponent(const PeriodicGroundState& gs, double lo, double hi);
DecayFit decay_exponent(const GroundState& gs, double lo, double hi);

// Sharp Gagliardo-Nirenberg ratio |Q|^2 |f|_4^4 / (2 |f|^2 |D^1/2 f|^2); equals 1 at Q.
double gn_functional(const SpectralField& f, double q_mass);
double gn_functional(const LineField& f, double q_mass);

// E(f) = 1/2 |D^1/2 f|^2 - 1/4 |f|_4^4.
double energy(const LineField& f);
double energy(const SpectralField& f);

// (D + 1)^{-1} g on the line by conjugate gradients.
LineField line_resolvent(const LineField& g, double tol = 1e-14);

}  // namespace hwb
