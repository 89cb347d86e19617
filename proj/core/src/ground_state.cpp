#include "hwb/ground_state.hpp"

#include <algorithm>
#include <cmath>

#include "hwb/error.hpp"

namespace hwb {
namespace {

void check_inputs(int power, double tol, int max_iter) {
  require(power == 2 || power == 3, "ground state power must be 2 or 3");
  require(tol > 0.0 && tol <= 1e-4, "ground state tolerance must lie in (0, 1e-4]");
  require(max_iter > 0, "ground state max_iter must be positive");
}

double ipow(double x, int p) { return p == 2 ? x * x : x * x * x; }

void check_positive(std::span<const cplx> q) {
  double top = 0.0, bottom = 0.0;
  for (auto z : q) {
    top = std::max(top, z.real());
    bottom = std::min(bottom, z.real());
  }
  if (bottom < -1e-8 * top) throw NumericalError("ground state lost positivity");
}

}  // namespace

PeriodicGroundState solve_ground_state(const Grid1D& grid, int power, double tol, int max_iter,
                                       double amplitude) {
  check_inputs(power, tol, max_iter);
  const std::size_t n = grid.size();
  const double gexp = static_cast<double>(power) / (power - 1.0);
  std::vector<double> u(n), up(n), next(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid.node(j);
    u[j] = amplitude * 2.0 / (1.0 + x * x);
  }
  std::vector<double> symbol(n);
  for (std::size_t j = 0; j < n; ++j) symbol[j] = std::abs(grid.wavenumber(j)) + 1.0;

  PeriodicGroundState out{.q = SpectralField::zeros(grid)};
  out.power = power;
  CVec work(n);
  auto residual_of = [&](const std::vector<double>& q) {
    CVec c(q.begin(), q.end());
    fft_forward(c, c);
    for (std::size_t j = 0; j < n; ++j) c[j] *= symbol[j];
    fft_backward(c, c);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = c[j].real() / n - ipow(q[j], power);
      acc += r * r;
    }
    return std::sqrt(acc * grid.spacing());
  };

  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      up[j] = ipow(u[j], power);
      work[j] = u[j];
    }
    fft_forward(work, work);
    double num = 0.0;
    double den = 0.0;
    CVec pw(up.begin(), up.end());
    fft_forward(pw, pw);
    for (std::size_t j = 0; j < n; ++j) {
      num += symbol[j] * std::norm(work[j]);
      den += (pw[j] * std::conj(work[j])).real();
      pw[j] /= symbol[j];
    }
    fft_backward(pw, pw);
    const double m = num / den;
    const double factor = std::pow(m, gexp) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) next[j] = factor * pw[j].real();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = grid.mirror(j);
      if (k >= j) {
        const double e = 0.5 * (next[j] + next[k]);
        next[j] = e;
        next[k] = e;
      }
    }
    double dist = 0.0;
    for (std::size_t j = 0; j < n; ++j) dist += (next[j] - u[j]) * (next[j] - u[j]);
    dist = std::sqrt(dist * grid.spacing());
    u.swap(next);
    const double res = residual_of(u);
    out.residual_history.push_back(res);
    out.iterations = it;
    if (!std::isfinite(res)) throw NumericalError("ground state iteration diverged");
    if (dist < tol && res < 10.0 * tol) {
      CVec q(u.begin(), u.end());
      check_positive(q);
      out.q = SpectralField(grid, std::move(q));
      out.residual_l2 = res;
      return out;
    }
  }
  throw NumericalError("ground state iteration did not converge");
}

LineField line_resolvent(const LineField& g, double tol) {
  const auto& grid = g.grid();
  auto op = [&](std::span<const cplx> v) {
    LineField f(grid, CVec(v.begin(), v.end()));
    LineField r = line_half_wave(f) + f;
    return CVec(r.values().begin(), r.values().end());
  };
  auto dot = [&](std::span<const cplx> a, std::span<const cplx> b) {
    return weighted_dot(a, b, grid.weights());
  };
  auto res = conjugate_gradient(op, g.values(), dot, tol, 4000);
  if (!res.converged && res.relative_residual > 1e-10) {
    throw NumericalError("resolvent solve did not converge");
  }
  return LineField(grid, std::move(res.x));
}

GroundState solve_ground_state(const LineGrid& grid, int power, double tol, int max_iter,
                               double amplitude) {
  check_inputs(power, tol, max_iter);
  const double gexp = static_cast<double>(power) / (power - 1.0);
  LineField u = LineField::from_function(grid, [&](double x) { return amplitude * 2.0 / (1.0 + x * x); });
  GroundState out{.q = LineField::zeros(grid)};
  out.power = power;
  auto pow_field = [&](const LineField& f) {
    CVec v(f.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = ipow(f[j].real(), power);
    return LineField(grid, std::move(v));
  };
  auto residual_of = [&](const LineField& q) {
    return line_norm(real_part(line_half_wave(q)) + q - pow_field(q));
  };
  for (int it = 1; it <= max_iter; ++it) {
    LineField up = pow_field(u);
    const double m = line_inner(real_part(line_half_wave(u)) + u, u).real() / line_inner(up, u).real();
    LineField next = real_part(std::pow(m, gexp) * line_resolvent(up));
    next = symmetrize(next, Parity::even);
    const double dist = line_norm(next - u);
    u = next;
    const double res = residual_of(u);
    out.residual_history.push_back(res);
    out.iterations = it;
    if (!std::isfinite(res)) throw NumericalError("ground state iteration diverged");
    if (dist < tol && res < 10.0 * tol) {
      check_positive(u.values());
      out.q = u;
      out.residual_l2 = res;
      out.mass = line_inner(u, u).real();
      // Q ~ c x^-2: fit well inside the algebraic regime.
      out.decay_fit = decay_exponent(out, 20.0, 60.0);
      return out;
    }
  }
  throw NumericalError("ground state iteration did not converge");
}

DecayFit fit_decay(std::span<const double> x, std::span<const double> q, double lo, double hi) {
  require(lo > 0.0 && hi > lo, "decay window must satisfy 0 < lo < hi");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) continue;
    if (!(q[i] > 0.0)) throw ValidationError("decay fit: non-positive samples in window");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(q[i]));
  }
  require(lx.size() >= 4, "decay fit: fewer than four samples in window");
  auto f = fit_line(lx, ly);
  // Algebraic decay is a straight line in log-log coordinates; anything with
  // visible curvature (exponential or Gaussian tails) is rejected.
  if (f.max_residual > 0.05) {
    throw ValidationError("decay fit rejected: log-log residuals are not linear");
  }
  DecayFit d;
  d.exponent = -f.slope;
  d.prefactor = std::exp(f.intercept);
  d.lo = lo;
  d.hi = hi;
  d.max_log_residual = f.max_residual;
  return d;
}

DecayFit decay_exponent(const PeriodicGroundState& gs, double lo, double hi) {
  const auto& g = gs.q.grid();
  require(lo >= 10.0 && hi <= 0.4 * 0.5 * g.length(),
          "decay window must lie inside [10, 0.4 L/2] to avoid the periodic tail");
  std::vector<double> x, q;
  for (std::size_t j = 0; j < g.size(); ++j) {
    x.push_back(g.node(j));
    q.push_back(gs.q[j].real());
  }
  return fit_decay(x, q, lo, hi);
}

DecayFit decay_exponent(const GroundState& gs, double lo, double hi) {
  require(lo > 0.0 && hi > lo, "decay window must satisfy 0 < lo < hi");
  LineTable table(gs.q);
  std::vector<double> x(64), q(64);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (x.size() - 1));
    q[i] = table(x[i]).real();
  }
  return fit_decay(x, q, lo, hi);
}

double gn_functional(const SpectralField& f, double q_mass) {
  const double m = inner_product(f, f).real();
  require(m > 0.0, "gn_functional: zero input");
  double l4 = 0.0;
  for (auto z : f.values()) l4 += std::norm(z) * std::norm(z);
  l4 *= f.grid().spacing();
  const double h = std::pow(sobolev_norm(f, 0.5, true), 2);
  return q_mass * l4 / (2.0 * m * h);
}

double gn_functional(const LineField& f, double q_mass) {
  const double m = line_inner(f, f).real();
  require(m > 0.0, "gn_functional: zero input");
  double l4 = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) l4 += std::pow(std::norm(f[j]), 2) * f.grid().weight(j);
  const double h = line_inner(line_half_wave(f), f).real();
  return q_mass * l4 / (2.0 * m * h);
}

double energy(const LineField& f) {
  double l4 = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) l4 += std::pow(std::norm(f[j]), 2) * f.grid().weight(j);
  return 0.5 * line_inner(line_half_wave(f), f).real() - 0.25 * l4;
}

double energy(const SpectralField& f) {
  double l4 = 0.0;
  for (auto z : f.values()) l4 += std::norm(z) * std::norm(z);
  l4 *= f.grid().spacing();
  return 0.5 * std::pow(sobolev_norm(f, 0.5, true), 2) - 0.25 * l4;
}

}  // namespace hwb
