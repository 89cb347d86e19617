#include "hwb/diagnostics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "hwb/error.hpp"
#include "hwb/numerics.hpp"

namespace hwb {

namespace {

const cplx I(0.0, 1.0);

double integrate(const Grid1D& g, const std::function<double(std::size_t)>& f) {
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) acc += f(j);
  return acc * g.spacing();
}

}  // namespace

EtaResult profile_error_eta(const Grid1D& grid, std::span<const BubbleParams> params,
                            std::span<const BubbleParams> rates, const ProfileBank& bank, double min_points) {
  require(!params.empty() && params.size() == rates.size(), "profile_error_eta: params and rates differ");
  CVec big_u(grid.size());
  CVec dudt(grid.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = params[k];
    const auto& d = rates[k];
    p.validate();
    check_resolvable(grid, p.lambda, min_points);
    BubbleFrame frame(grid, bank.layout(), p.lambda, p.alpha);
    auto q = bank.modified(p.b, p.v, Component::value);
    frame.render(q, -0.5, p.gamma, big_u, true);

    // d/dlambda and d/dalpha both carry lambda^{-3/2}; the rest lambda^{-1/2}.
    auto slow = LineTable::zeros_like(bank.layout());
    slow.axpy(-d.lambda, bank.modified(p.b, p.v, Component::scaling));
    slow.axpy(-d.alpha, bank.modified(p.b, p.v, Component::derivative));
    auto fast = LineTable::zeros_like(bank.layout());
    fast.axpy(d.b, bank.d_b(p.b, p.v, Component::value));
    fast.axpy(d.v, bank.d_v(p.b, p.v, Component::value));
    fast.axpy(I * d.gamma, q);
    frame.render(slow, -1.5, p.gamma, dudt, true);
    frame.render(fast, -0.5, p.gamma, dudt, true);
  }
  SpectralField u(grid, big_u);
  auto du = fractional_laplacian(u, 1.0);
  CVec eta(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    eta[j] = I * dudt[j] - du[j] + std::norm(big_u[j]) * big_u[j];
  }
  EtaResult out{SpectralField(grid, std::move(eta)), {}};
  auto d1 = derivative(out.eta);
  out.norms = {l2_norm(out.eta), l2_norm(d1), l2_norm(derivative(d1))};
  return out;
}

EtaResult profile_error_eta(const Grid1D& grid, const ParamSeries& series, std::size_t i,
                            const ProfileBank& bank, double min_points) {
  require(series.t.size() >= 3, "profile_error_eta: need at least three time samples");
  require(i < series.t.size(), "profile_error_eta: sample index out of range");
  auto rates = param_rates(series);
  return profile_error_eta(grid, series.params[i], rates[i], bank, min_points);
}

double localized_mass(const SpectralField& u_k, const SpectralField& r, const SpectralField& phi_k) {
  require_same_grid(u_k, r);
  require_same_grid(r, phi_k);
  const double cross = 2.0 * inner_product(u_k, r).real();
  const double local = integrate(r.grid(), [&](std::size_t j) { return std::norm(r[j]) * phi_k[j].real(); });
  return cross + local;
}

double localized_momentum(const SpectralField& u, const SpectralField& phi_k) {
  require_same_grid(u, phi_k);
  auto du = derivative(u);
  return integrate(u.grid(), [&](std::size_t j) { return (du[j] * std::conj(u[j])).imag() * phi_k[j].real(); });
}

std::vector<std::vector<double>> refined_v_ratio(const ParamSeries& s) {
  std::vector<std::vector<double>> out;
  for (const auto& row : s.params) {
    std::vector<double> r;
    for (const auto& p : row) r.push_back(std::abs(p.v / p.lambda - 1.0));
    out.push_back(std::move(r));
  }
  return out;
}

ChiCutoff::ChiCutoff(double a) : a_(a) {
  require(std::isfinite(a) && a > 0.0, "chi cutoff: A must be positive");
  // Bridge p(x) = chi'(x) on [1,2] in s = x - 1, matching p, p', p'' at both ends.
  const double e2 = std::exp(-2.0);
  Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> rhs;
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(2, 2) = 2.0;
  for (int i = 0; i < 6; ++i) {
    m(3, i) = 1.0;
    if (i >= 1) m(4, i) = i;
    if (i >= 2) m(5, i) = i * (i - 1);
  }
  rhs << 1.0, 1.0, 0.0, 3.0 - e2, e2, -e2;
  Eigen::Matrix<double, 6, 1> c = m.fullPivLu().solve(rhs);
  for (int i = 0; i < 6; ++i) c_[i] = c(i);
  chi1_ = 0.5;
  chi2_ = chi1_;
  for (int i = 0; i < 6; ++i) chi2_ += c_[i] / (i + 1);

  min_chi2_ = INFINITY;
  const int audit = 20000;
  for (int j = 0; j <= audit; ++j) min_chi2_ = std::min(min_chi2_, base(3.0 * j / audit, 2));
  if (min_chi2_ < -1e-12) {
    throw NumericalError("chi cutoff: bridge fails the convexity audit (min chi'' = " +
                         std::to_string(min_chi2_) + ")");
  }
}

double ChiCutoff::base(double x, int order) const {
  require(order >= 0 && order <= 4, "chi cutoff: derivative order must be in 0..4");
  if (x < 0.0) {
    const double sign = order % 2 == 0 ? 1.0 : -1.0;
    return sign * base(-x, order);
  }
  if (x <= 1.0) {
    switch (order) {
      case 0: return 0.5 * x * x;
      case 1: return x;
      case 2: return 1.0;
      default: return 0.0;
    }
  }
  if (x >= 2.0) {
    const double e = std::exp(-x);
    switch (order) {
      case 0: return chi2_ + 3.0 * (x - 2.0) + std::exp(-2.0) - e;
      case 1: return 3.0 - e;
      case 2: return e;
      case 3: return -e;
      default: return e;
    }
  }
  const double s = x - 1.0;
  if (order == 0) {
    double acc = 0.0;
    for (int i = 5; i >= 0; --i) acc = acc * s + c_[i] / (i + 1);
    return chi1_ + acc * s;
  }
  // (order-1)-th derivative of the bridge polynomial.
  const int k = order - 1;
  double acc = 0.0;
  for (int i = 5; i >= k; --i) {
    double f = 1.0;
    for (int j = 0; j < k; ++j) f *= i - j;
    acc += c_[i] * f * std::pow(s, i - k);
  }
  return acc;
}

double ChiCutoff::operator()(double x, int order) const {
  return std::pow(a_, 2 - order) * base(x / a_, order);
}

ChiCutoff::Table ChiCutoff::tabulate(std::span<const double> x) const {
  Table t;
  for (int o = 0; o < 5; ++o) {
    t.d[o].reserve(x.size());
    for (double xi : x) t.d[o].push_back((*this)(xi, o));
  }
  return t;
}

EnergySplit generalized_energy(const SpectralField& u, const SpectralField& big_u, const SpectralField& r,
                               std::span<const BubbleParams> params, const LocalizationSet& loc,
                               const ChiCutoff& chi) {
  require_same_grid(u, big_u);
  require_same_grid(u, r);
  require(params.size() == loc.phi.size(), "generalized_energy: one localization function per bubble");
  const double defect = l2_norm(u - big_u - r);
  if (defect > 1e-10 * std::max(1.0, l2_norm(u))) {
    throw ValidationError("generalized_energy: u differs from U + R by " + std::to_string(defect));
  }
  const Grid1D& g = u.grid();
  const std::size_t n = g.size();
  auto dr = derivative(r);
  const double h12 = sobolev_norm(r, 0.5, true);

  // Pointwise density of every term except the D^1/2 one.
  std::vector<double> mass_w(n, 0.0), virial(n, 0.0);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = params[k];
    for (std::size_t j = 0; j < n; ++j) {
      const double phi = loc.phi[k][j].real();
      if (phi == 0.0) continue;
      mass_w[j] += 0.5 * phi / p.lambda;
      const double y = (g.node(j) - p.alpha) / p.lambda;
      virial[j] += 0.5 * p.b * chi(y, 1) * phi;
    }
  }
  double mass_term = 0.0, potential = 0.0, virial_term = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx uj = u[j], bu = big_u[j], rj = r[j];
    mass_term += mass_w[j] * std::norm(rj);
    potential += 0.25 * std::norm(uj) * std::norm(uj) - 0.25 * std::norm(bu) * std::norm(bu) -
                 (std::norm(bu) * bu * std::conj(rj)).real();
    virial_term += virial[j] * (dr[j] * std::conj(rj)).imag();
  }
  const double h = g.spacing();
  EnergySplit out;
  out.energy_part = 0.5 * h12 * h12 + h * (mass_term - potential);
  out.virial_part = h * virial_term;

  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx uj = u[j], bu = big_u[j], rj = r[j];
    total += mass_w[j] * std::norm(rj) -
             (0.25 * std::norm(uj) * std::norm(uj) - 0.25 * std::norm(bu) * std::norm(bu) -
              (std::norm(bu) * bu * std::conj(rj)).real()) +
             virial[j] * (dr[j] * std::conj(rj)).imag();
  }
  out.total = 0.5 * h12 * h12 + h * total;
  out.split_defect = std::abs(out.total - out.energy_part - out.virial_part);
  return out;
}

double remainder_size_x(const SpectralField& r, double t) {
  require(t != 0.0, "X(t) is undefined at t = 0");
  const double h = sobolev_norm(r, 0.5, true);
  const double m = l2_norm(r);
  return h * h + m * m / (t * t);
}

SandwichFit sandwich_fit(std::span<const double> t, std::span<const double> x, std::span<const double> energy,
                         double delta) {
  require(t.size() == x.size() && t.size() == energy.size(), "sandwich_fit: series lengths differ");
  SandwichFit f;
  f.c1 = INFINITY;
  f.min_ratio = INFINITY;
  f.max_ratio = -INFINITY;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(x[i] > 0.0)) continue;
    ++f.samples;
    const double ratio = energy[i] / x[i];
    f.min_ratio = std::min(f.min_ratio, ratio);
    f.max_ratio = std::max(f.max_ratio, ratio);
    // Largest C with C X - |t|^p / C <= I: positive root of X C^2 - I C - |t|^p.
    const double tp = std::pow(std::abs(t[i]), 6.0 - 2.0 * delta);
    const double c = (energy[i] + std::sqrt(energy[i] * energy[i] + 4.0 * x[i] * tp)) / (2.0 * x[i]);
    f.c1 = std::min(f.c1, c);
  }
  require(f.samples > 0, "sandwich_fit: no sample with X > 0");
  f.c2 = f.max_ratio;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(x[i] > 0.0)) continue;
    const double tp = std::pow(std::abs(t[i]), 6.0 - 2.0 * delta);
    const bool lower = f.c1 * x[i] - tp / f.c1 <= energy[i] * (1.0 + 1e-12) + 1e-300;
    const bool upper = energy[i] <= f.c2 * x[i] * (1.0 + 1e-12);
    if (!lower || !upper) ++f.violations;
  }
  return f;
}

MonotonicityReport monotonicity_trend(std::span<const double> t, std::span<const double> energy,
                                      std::span<const double> r_l2, std::span<const double> r_h12,
                                      std::span<const double> x, const MonotonicityOptions& opts) {
  const std::size_t n = t.size();
  require(energy.size() == n && r_l2.size() == n && r_h12.size() == n && x.size() == n,
          "monotonicity_trend: series lengths differ");
  require(n >= 5, "monotonicity_trend: need at least five samples");
  MonotonicityReport rep;
  rep.d_energy = differentiate_series(t, energy);
  std::vector<double> need(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double at = std::abs(t[i]);
    rep.lower.push_back(opts.c_mono * r_l2[i] * r_l2[i] / (at * at * at));
    const double log_term = r_h12[i] > 0.0 ? std::sqrt(std::log(2.0 + 1.0 / r_h12[i])) * x[i] : 0.0;
    rep.envelope.push_back(log_term + std::pow(at, 3.0 - opts.delta));
    const double margin = rep.d_energy[i] - rep.lower[i];
    rep.pass.push_back(margin + opts.c_env * rep.envelope[i] >= 0.0);
    rep.sign.push_back(rep.d_energy[i] > 0.0 ? 1 : rep.d_energy[i] < 0.0 ? -1 : 0);
    need[i] = margin >= 0.0 ? 0.0 : -margin / rep.envelope[i];
  }
  rep.pass_fraction = static_cast<double>(std::count(rep.pass.begin(), rep.pass.end(), true)) / n;
  std::sort(need.begin(), need.end());
  const auto idx = static_cast<std::size_t>(std::ceil(opts.required_fraction * n)) - 1;
  rep.fitted_c_env = need[std::min(idx, n - 1)];
  return rep;
}

DecouplingIntegrals decoupling_integrals(const RealFunction& f, const RealFunction& g, const RealFunction& h,
                                         std::span<const double> eps) {
  // Trapezoid rule in theta for x = l tan(theta/2): spectrally accurate for integrands
  // with algebraic decay, the scale l tracking the separation of the two peaks.
  auto line_integral = [](const std::function<double(double)>& w, double l) {
    const int m = 1 << 15;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const double th = -M_PI + (j + 0.5) * 2.0 * M_PI / m;
      const double c = std::cos(th);
      acc += w(l * std::tan(0.5 * th)) * l / (1.0 + c);
    }
    return acc * 2.0 * M_PI / m;
  };
  DecouplingIntegrals out;
  for (double e : eps) {
    require(e > 0.0, "decoupling: eps must be positive");
    const double shift = 1.0 / e;
    out.overlap.push_back(line_integral([&](double x) { return std::abs(f(x) * g(x + shift)); }, 1.0 + shift));
    out.dilated.push_back(line_integral([&](double x) { const double v = f(x / e); return v * v * h(x); }, 1.0));
  }
  return out;
}

DecouplingReport decoupling_check(const RealFunction& f, const RealFunction& g, const RealFunction& h,
                                  std::span<const double> eps) {
  require(eps.size() >= 2, "decoupling_check: need at least two eps values");
  auto decays = [](const RealFunction& w) {
    double near = 0.0, far = 0.0;
    for (int j = 0; j <= 16; ++j) {
      const double x = 10.0 * std::pow(2.0, j);
      const double m = std::max(std::abs(w(x)), std::abs(w(-x))) * (1.0 + x * x);
      (j < 4 ? near : far) = std::max(j < 4 ? near : far, m);
    }
    return far <= 10.0 * near + 1e-300;
  };
  if (!decays(f) || !decays(g)) throw ValidationError("decoupling_check: inputs must decay like <x>^-2");
  DecouplingReport rep;
  rep.integrals = decoupling_integrals(f, g, h, eps);
  rep.overlap_slope = fit_loglog(eps, rep.integrals.overlap).slope;
  rep.dilated_slope = fit_loglog(eps, rep.integrals.dilated).slope;
  return rep;
}

const std::array<const char*, kCorridorCount> kCorridorNames = {
    "R_h12", "R_l2", "R_hs", "lambda", "b", "alpha", "v", "gamma"};

void validate_corridor_exponents(double delta, double varsigma) {
  if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("delta must lie in (0, 1/2)");
  if (!(varsigma > 0.0 && varsigma < 0.5)) throw ValidationError("varsigma must lie in (0, 1/2)");
  if (!(delta + 2.0 * varsigma < 1.0)) throw ValidationError("delta + 2 varsigma must be below 1");
}

CorridorReport bootstrap_monitor(std::span<const CorridorSample> samples, const CorridorTarget& target,
                                 double delta, double varsigma) {
  validate_corridor_exponents(delta, varsigma);
  require(!samples.empty(), "bootstrap_monitor: empty series");
  const double w2 = target.omega * target.omega;
  CorridorReport rep;
  rep.exponent = {2.0 - delta, 3.0 - delta, 1.0 - delta - 2.0 * varsigma, 4.0 - 2.0 * delta,
                  3.0 - 2.0 * delta, 3.0 - delta, 4.0 - 2.0 * delta, 1.0 - 2.0 * delta};
  const std::size_t m = samples.size();
  std::vector<std::array<double, kCorridorCount>> q(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& s = samples[i];
    require(s.t < 0.0, "bootstrap_monitor: samples must have t < 0");
    require(s.params.size() == target.centers.size() && s.params.size() == target.thetas.size(),
            "bootstrap_monitor: bubble count differs from the target");
    auto& qi = q[i];
    qi = {s.r_h12, s.r_l2, s.r_hs, 0.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < s.params.size(); ++k) {
      const auto& p = s.params[k];
      const double t = s.t;
      qi[3] = std::max(qi[3], std::abs(p.lambda - w2 * t * t / 4.0));
      qi[4] = std::max(qi[4], std::abs(p.b + w2 * t / 2.0));
      qi[5] = std::max(qi[5], std::abs(p.alpha - target.centers[k]));
      qi[6] = std::max(qi[6], std::abs(p.v - w2 * t * t / 4.0));
      qi[7] = std::max(qi[7], std::abs(p.gamma + 4.0 / (w2 * t) - target.thetas[k]));
    }
  }
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(samples[a].t) > std::abs(samples[b].t); });
  const std::size_t calib = std::max<std::size_t>(1, m / 5);

  std::vector<double> ts(m);
  for (std::size_t i = 0; i < m; ++i) ts[i] = samples[i].t;
  rep.flags.assign(m, {});
  std::size_t all = 0;
  for (int c = 0; c < kCorridorCount; ++c) {
    double cst = 1.0;
    for (std::size_t j = 0; j < calib; ++j) {
      const std::size_t i = order[j];
      cst = std::max(cst, q[i][c] / std::pow(std::abs(ts[i]), rep.exponent[c]));
    }
    rep.constant[c] = cst;
    std::vector<double> series(m);
    std::size_t pass = 0;
    for (std::size_t i = 0; i < m; ++i) {
      series[i] = q[i][c];
      rep.flags[i][c] = q[i][c] <= 2.0 * cst * std::pow(std::abs(ts[i]), rep.exponent[c]);
      pass += rep.flags[i][c];
    }
    rep.fraction[c] = static_cast<double>(pass) / m;
    const auto positive = std::count_if(series.begin(), series.end(), [](double x) { return x > 0.0; });
    rep.slope[c] = positive >= 2 ? fit_loglog(ts, series).slope : NAN;
  }
  for (const auto& f : rep.flags) all += std::all_of(f.begin(), f.end(), [](bool b) { return b; });
  rep.all_pass_fraction = static_cast<double>(all) / m;
  return rep;
}

BallMasses mass_quantization(const SpectralField& u, std::span<const double> centers, double r) {
  require(!centers.empty(), "mass_quantization: need at least one center");
  require(r > 0.0, "mass_quantization: radius must be positive");
  for (std::size_t k = 1; k < centers.size(); ++k) {
    if (!(centers[k] - centers[k - 1] > 2.0 * r)) throw ValidationError("mass_quantization: balls overlap");
  }
  const Grid1D& g = u.grid();
  BallMasses out;
  out.inside.assign(centers.size(), 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double m = std::norm(u[j]) * g.spacing();
    bool in = false;
    for (std::size_t k = 0; k < centers.size() && !in; ++k) {
      if (std::abs(g.node(j) - centers[k]) < r) {
        out.inside[k] += m;
        in = true;
      }
    }
    if (!in) out.outside += m;
  }
  return out;
}

}  // namespace hwb
