#include "hwb/modulation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "hwb/error.hpp"
#include "hwb/numerics.hpp"

namespace hwb {
namespace {

const cplx I(0.0, 1.0);

struct Rendered {
  CVec bubble;
  std::array<CVec, 5> dirs;
  std::array<double, 5> norms{};
};

// Which part of <d, R> each condition uses: real for S1, G1; imaginary for the rest.
constexpr std::array<bool, 5> kUsesReal = {true, true, false, false, false};

Rendered render_all(const Grid1D& grid, const BubbleParams& p, const ProfileBank& bank) {
  BubbleFrame frame(grid, bank.layout(), p.lambda, p.alpha);
  Rendered r;
  const std::size_t n = grid.size();
  r.bubble.resize(n);
  frame.render(bank.modified(p.b, p.v, Component::value), -0.5, p.gamma, r.bubble);
  for (auto& d : r.dirs) d.resize(n);
  frame.render(bank.s1(Component::value), -0.5, p.gamma, r.dirs[0]);
  frame.render(bank.g1(Component::value), -0.5, p.gamma, r.dirs[1]);
  frame.render(bank.modified(p.b, p.v, Component::derivative), -1.5, p.gamma, r.dirs[2]);
  frame.render(bank.modified(p.b, p.v, Component::scaling), -0.5, p.gamma, r.dirs[3]);
  frame.render(bank.rho_k(p.b, p.v, Component::value), -0.5, p.gamma, r.dirs[4]);
  for (int i = 0; i < 5; ++i) {
    double acc = 0.0;
    for (auto z : r.dirs[i]) acc += std::norm(z);
    r.norms[i] = std::sqrt(acc * grid.spacing());
  }
  return r;
}

double condition(const CVec& d, const CVec& r, bool use_real, double h) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) acc += d[j] * std::conj(r[j]);
  acc *= h;
  return use_real ? acc.real() : acc.imag();
}

BubbleParams shifted(const BubbleParams& p, int which, double h) {
  BubbleParams q = p;
  switch (which) {
    case 0: q.lambda += h; break;
    case 1: q.b += h; break;
    case 2: q.v += h; break;
    case 3: q.alpha += h; break;
    default: q.gamma += h; break;
  }
  return q;
}

double fd_step(const BubbleParams& p, int which) {
  constexpr double eps = 1e-7;
  switch (which) {
    case 0:
    case 3: return eps * p.lambda;
    default: return eps;
  }
}

double l2(const CVec& v, double h) {
  double acc = 0.0;
  for (auto z : v) acc += std::norm(z);
  return std::sqrt(acc * h);
}

}  // namespace

BubbleDirections bubble_directions(const Grid1D& grid, const BubbleParams& p, const ProfileBank& bank) {
  Rendered r = render_all(grid, p, bank);
  return {SpectralField(grid, std::move(r.bubble)),
          {SpectralField(grid, std::move(r.dirs[0])), SpectralField(grid, std::move(r.dirs[1])),
           SpectralField(grid, std::move(r.dirs[2])), SpectralField(grid, std::move(r.dirs[3])),
           SpectralField(grid, std::move(r.dirs[4]))}};
}

DecompositionResult decompose(const SpectralField& u, std::span<const BubbleParams> guess,
                              const ProfileBank& bank, const DecomposeOptions& opts) {
  require(!guess.empty(), "decompose: need at least one bubble");
  const Grid1D& grid = u.grid();
  const std::size_t n = grid.size();
  const std::size_t kk = guess.size();
  const double h = grid.spacing();
  const double unorm = l2_norm(u);
  require(unorm > 0.0, "decompose: zero field");

  std::vector<BubbleParams> params(guess.begin(), guess.end());
  std::vector<Rendered> rend(kk);
  CVec rem(n);

  auto refresh = [&]() {
    for (const auto& p : params) {
      p.validate();
      check_resolvable(grid, p.lambda, opts.min_points);
    }
    for (std::size_t k = 0; k < kk; ++k) rend[k] = render_all(grid, params[k], bank);
    auto uv = u.values();
    for (std::size_t j = 0; j < n; ++j) {
      cplx s = uv[j];
      for (std::size_t k = 0; k < kk; ++k) s -= rend[k].bubble[j];
      rem[j] = s;
    }
  };
  // Conditions scaled by the direction norm, so they carry the units of R.
  auto residuals = [&](const std::vector<Rendered>& rs, const CVec& r) {
    Eigen::VectorXd f(5 * kk);
    for (std::size_t k = 0; k < kk; ++k) {
      for (int i = 0; i < 5; ++i) f(5 * k + i) = condition(rs[k].dirs[i], r, kUsesReal[i], h) / rs[k].norms[i];
    }
    return f;
  };

  refresh();
  Eigen::VectorXd f = residuals(rend, rem);
  DecompositionResult out{.params = params, .remainder = SpectralField::zeros(grid)};
  const double f_tol = opts.tol * unorm;
  int it = 0;
  for (; it < opts.max_newton && f.cwiseAbs().maxCoeff() > f_tol; ++it) {
    Eigen::MatrixXd jac(5 * kk, 5 * kk);
    for (std::size_t k = 0; k < kk; ++k) {
      for (int which = 0; which < 5; ++which) {
        const double step = fd_step(params[k], which);
        Rendered pert = render_all(grid, shifted(params[k], which, step), bank);
        CVec r2 = rem;
        for (std::size_t j = 0; j < n; ++j) r2[j] -= pert.bubble[j] - rend[k].bubble[j];
        std::vector<Rendered> rs2 = rend;
        rs2[k] = std::move(pert);
        Eigen::VectorXd f2 = residuals(rs2, r2);
        jac.col(static_cast<long>(5 * k + which)) = (f2 - f) / step;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (lu.rank() < jac.rows()) throw NumericalError("decompose: singular Jacobian");
    Eigen::VectorXd delta = -lu.solve(f);

    const auto saved = params;
    const auto saved_rend = rend;
    const CVec saved_rem = rem;
    const Eigen::VectorXd f_saved = f;
    const double f_old = f.norm();
    double scale = 1.0;
    bool stalled = false;
    for (int tries = 0;; ++tries) {
      for (std::size_t k = 0; k < kk; ++k) {
        params[k] = saved[k];
        params[k].lambda += scale * delta(5 * k);
        params[k].b += scale * delta(5 * k + 1);
        params[k].v += scale * delta(5 * k + 2);
        params[k].alpha += scale * delta(5 * k + 3);
        params[k].gamma += scale * delta(5 * k + 4);
      }
      bool ok = true;
      for (std::size_t k = 0; k < kk; ++k) ok = ok && params[k].lambda > 0.5 * saved[k].lambda;
      if (ok) {
        refresh();
        f = residuals(rend, rem);
        if (f.allFinite() && f.norm() < f_old) break;
      }
      if (tries >= 6) {
        // No descent left: at the rounding floor this is convergence, otherwise divergence.
        if (f_saved.cwiseAbs().maxCoeff() > 1e3 * f_tol) throw NumericalError("decompose: Newton iteration diverged");
        params = saved;
        rend = saved_rend;
        rem = saved_rem;
        f = f_saved;
        stalled = true;
        break;
      }
      scale *= 0.5;
    }
    if (stalled) break;
  }
  if (f.cwiseAbs().maxCoeff() > 1e3 * f_tol) throw NumericalError("decompose: Newton did not converge");

  out.params = params;
  out.newton_iters = it;
  out.remainder = SpectralField(grid, rem);
  const double rn = std::max(l2(rem, h), 1e-300);
  out.ortho_residuals.resize(5 * kk);
  for (std::size_t k = 0; k < kk; ++k) {
    for (int i = 0; i < 5; ++i) out.ortho_residuals[5 * k + i] = std::abs(f(5 * k + i)) / rn;
  }
  if (opts.localization) {
    for (const auto& phi : opts.localization->phi) out.localized_remainders.push_back(out.remainder * phi);
  }
  return out;
}

std::vector<std::vector<BubbleParams>> param_rates(const ParamSeries& s) {
  require(s.t.size() >= 3 && s.t.size() == s.params.size(), "param_rates: need at least three samples");
  const std::size_t m = s.t.size();
  const std::size_t kk = s.params.front().size();
  std::vector<std::vector<BubbleParams>> rates(m, std::vector<BubbleParams>(kk));
  for (std::size_t k = 0; k < kk; ++k) {
    for (int which = 0; which < 5; ++which) {
      std::vector<double> f(m);
      for (std::size_t i = 0; i < m; ++i) {
        const auto& p = s.params[i][k];
        f[i] = which == 0 ? p.lambda : which == 1 ? p.b : which == 2 ? p.v : which == 3 ? p.alpha : p.gamma;
      }
      auto d = differentiate_series(s.t, f);
      for (std::size_t i = 0; i < m; ++i) {
        auto& r = rates[i][k];
        (which == 0 ? r.lambda : which == 1 ? r.b : which == 2 ? r.v : which == 3 ? r.alpha : r.gamma) = d[i];
      }
    }
  }
  return rates;
}

std::vector<ModSample> mod_vector(const ParamSeries& s) {
  auto rates = param_rates(s);
  std::vector<ModSample> out(s.t.size());
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    out[i].t = s.t[i];
    for (std::size_t k = 0; k < s.params[i].size(); ++k) {
      const auto& p = s.params[i][k];
      const auto& d = rates[i][k];
      std::array<double, 5> terms = {std::abs(d.lambda + p.b), std::abs(p.lambda * d.b + 0.5 * p.b * p.b),
                                     std::abs(d.alpha - p.v), std::abs(p.lambda * d.v + p.b * p.v),
                                     std::abs(p.lambda * d.gamma - 1.0)};
      double sum = 0.0;
      for (double x : terms) sum += x;
      out[i].terms.push_back(terms);
      out[i].per_bubble.push_back(sum);
      out[i].total += sum;
    }
  }
  return out;
}

double omega_from_theorem_convention(double omega_thm) {
  require(omega_thm > 0.0, "omega must be positive");
  return 2.0 * std::sqrt(omega_thm);
}

ParamSeries integrate_param_ode(std::span<const BubbleParams> initial, double t0, double t1, double dt) {
  require(dt > 0.0, "integrate_param_ode: dt must be positive");
  using State = std::vector<BubbleParams>;
  auto rhs = [](const State& s) {
    State d(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto& p = s[k];
      if (!(p.lambda > 0.0)) throw NumericalError("integrate_param_ode: lambda reached zero");
      d[k] = {-p.b, -p.b * p.b / (2.0 * p.lambda), -p.b * p.v / p.lambda, p.v, 1.0 / p.lambda};
    }
    return d;
  };
  auto axpy = [](const State& s, double a, const State& d) {
    State o = s;
    for (std::size_t k = 0; k < s.size(); ++k) {
      o[k].lambda += a * d[k].lambda;
      o[k].b += a * d[k].b;
      o[k].v += a * d[k].v;
      o[k].alpha += a * d[k].alpha;
      o[k].gamma += a * d[k].gamma;
    }
    return o;
  };
  ParamSeries out;
  State s(initial.begin(), initial.end());
  double t = t0;
  const double sgn = t1 >= t0 ? 1.0 : -1.0;
  out.t.push_back(t);
  out.params.push_back(s);
  while (sgn * (t1 - t) > 1e-15) {
    // Along the reduced flow lambda hits zero after 2 lambda / b when b points
    // the integration towards collapse; refuse targets at or beyond it.
    for (const auto& p : s) {
      if (sgn * p.b > 0.0 && sgn * (t1 - t) >= 2.0 * p.lambda / std::abs(p.b)) {
        throw NumericalError("integrate_param_ode: lambda reaches zero before the target time");
      }
    }
    const double hstep = sgn * std::min(dt, sgn * (t1 - t));
    const State k1 = rhs(s);
    const State k2 = rhs(axpy(s, 0.5 * hstep, k1));
    const State k3 = rhs(axpy(s, 0.5 * hstep, k2));
    const State k4 = rhs(axpy(s, hstep, k3));
    s = axpy(s, hstep / 6.0, k1);
    s = axpy(s, hstep / 3.0, k2);
    s = axpy(s, hstep / 3.0, k3);
    s = axpy(s, hstep / 6.0, k4);
    t += hstep;
    if (std::abs(t1 - t) < 1e-14) t = t1;
    out.t.push_back(t);
    out.params.push_back(s);
  }
  return out;
}

CVec evaluate_trig(const SpectralField& f, std::span<const double> x) {
  const auto& g = f.grid();
  auto spec = f.spectrum();
  const std::size_t n = g.size();
  CVec out(x.size());
  const double inv = 1.0 / static_cast<double>(n);
  const double base = 2.0 * std::numbers::pi / g.length();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = x[i] + 0.5 * g.length();
    // Recurrence for exp(i m base s), m >= 0 and m < 0 separately.
    const cplx step = std::polar(1.0, base * s);
    cplx acc = 0.0;
    cplx e = 1.0;
    for (std::size_t m = 0; m < n / 2; ++m) {
      acc += spec[m] * e;
      e *= step;
    }
    // Nyquist shared evenly between +n/2 and -n/2 keeps real data real.
    const cplx nyq = std::polar(1.0, base * s * static_cast<double>(n / 2));
    acc += 0.5 * spec[n / 2] * (nyq + std::conj(nyq));
    e = std::conj(step);
    for (std::size_t m = n - 1; m > n / 2; --m) {
      acc += spec[m] * e;
      e *= std::conj(step);
    }
    out[i] = acc * inv;
  }
  return out;
}

LineField renormalized_remainder(const SpectralField& r, const BubbleParams& p, const LineGrid& line) {
  p.validate();
  check_resolvable(r.grid(), p.lambda);
  const double half = 0.5 * r.grid().length();
  std::vector<double> xs;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < line.size(); ++j) {
    const double x = p.lambda * line.node(j) + p.alpha;
    if (x >= -half && x < half) {
      xs.push_back(x);
      idx.push_back(j);
    }
  }
  CVec vals = evaluate_trig(r, xs);
  CVec out(line.size());
  const cplx c = std::sqrt(p.lambda) * std::polar(1.0, -p.gamma);
  for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = c * vals[i];
  return LineField(line, std::move(out));
}

}  // namespace hwb
