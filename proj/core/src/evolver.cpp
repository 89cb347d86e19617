#include "hwb/evolver.hpp"

#include <algorithm>
#include <cmath>

#include "hwb/error.hpp"

namespace hwb {

Evolver::Evolver(Grid1D grid, Nonlinearity nl, bool dealias) : grid_(grid), nl_(nl), dealias_(dealias) {
  abs_xi_.resize(grid_.size());
  for (std::size_t j = 0; j < grid_.size(); ++j) abs_xi_[j] = std::abs(grid_.wavenumber(j));
}

void Evolver::nonlinear(CVec& u, double tau) const {
  if (nl_ == Nonlinearity::linear) return;
  const double s = nl_ == Nonlinearity::focusing ? tau : -tau;
  for (auto& z : u) z *= std::polar(1.0, s * std::norm(z));
}

CVec Evolver::linear_multiplier(double dt) const {
  const std::size_t n = grid_.size();
  const double inv = 1.0 / static_cast<double>(n);
  const long cut = static_cast<long>(n / 3);
  CVec m(n);
  for (std::size_t j = 0; j < n; ++j) {
    m[j] = dealias_ && std::labs(grid_.mode(j)) > cut ? cplx(0.0) : std::polar(inv, -dt * abs_xi_[j]);
  }
  return m;
}

void Evolver::linear(CVec& u, const CVec& multiplier) const {
  fft_forward(u, u);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] *= multiplier[j];
  fft_backward(u, u);
}

namespace {

void check_finite(const CVec& u) {
  for (const auto& z : u) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw NumericalError("step produced non-finite values (unresolved blow-up)");
    }
  }
}

}  // namespace

SimulationState Evolver::step(const SimulationState& s, double dt, Direction dir) const {
  require(dt > 0.0 && std::isfinite(dt), "step: dt must be positive");
  require(s.u.grid() == grid_, "step: state grid differs from evolver grid");
  const double sgn = static_cast<double>(static_cast<int>(dir));
  CVec u(s.u.values().begin(), s.u.values().end());
  nonlinear(u, 0.5 * sgn * dt);
  linear(u, linear_multiplier(sgn * dt));
  nonlinear(u, 0.5 * sgn * dt);
  check_finite(u);
  return {s.t + sgn * dt, SpectralField(grid_, std::move(u)), dt, s.step_count + 1};
}

double Evolver::adapt_dt(const SimulationState& s, std::optional<double> lambda_min,
                         const DtPolicy& policy) const {
  require(policy.c_dt > 0.0 && policy.c_dt <= 1.0, "adapt_dt: c_dt must lie in (0, 1]");
  const double amp = linf_norm(s.u);
  double scale = amp > 0.0 ? 1.0 / (amp * amp) : INFINITY;
  if (lambda_min) scale = std::min(scale, *lambda_min);
  return std::min(policy.dt_max, policy.c_dt * scale);
}

Conserved conserved(const SpectralField& u) {
  Conserved c;
  c.mass = inner_product(u, u).real();
  double l4 = 0.0;
  for (auto z : u.values()) l4 += std::norm(z) * std::norm(z);
  l4 *= u.grid().spacing();
  c.energy = 0.5 * std::pow(sobolev_norm(u, 0.5, true), 2) - 0.25 * l4;
  c.momentum = inner_product(derivative(u), u).imag();
  return c;
}

double lambda_from_amplitude(const SpectralField& u, double q0) {
  const double m = linf_norm(u);
  return m > 0.0 ? std::pow(q0 / m, 2) : INFINITY;
}

BlowupCheck blowup_detected(const SimulationState& s, double initial_h12, std::optional<double> lambda_est,
                            const BlowupThresholds& th) {
  const auto& g = s.u.grid();
  if (lambda_est && *lambda_est < th.min_points * g.spacing()) return {true, "resolution"};
  if (initial_h12 > 0.0 && sobolev_norm(s.u, 0.5) > th.norm_growth * initial_h12) return {true, "norm"};
  if (nyquist_mass_fraction(s.u) > th.nyquist_fraction) return {true, "spectral"};
  return {};
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::reached_t_stop: return "reached_t_stop";
    case Termination::blowup: return "blowup";
    case Termination::observer_stop: return "observer_stop";
    case Termination::numerical_error: return "numerical_error";
  }
  return "unknown";
}

RunResult run(const Evolver& ev, SimulationState s, double t_stop, const RunControl& ctl,
              const Observer& observer) {
  require(ctl.observer_stride > 0, "run: observer stride must be positive");
  require(s.u.grid() == ev.grid(), "run: state grid differs from evolver grid");
  const Direction dir = t_stop >= s.t ? Direction::forward : Direction::backward;
  const double sgn = static_cast<double>(static_cast<int>(dir));
  std::vector<double> marks;
  for (double m : ctl.landmarks) {
    if (sgn * (m - s.t) > 0.0 && sgn * (t_stop - m) > 0.0) marks.push_back(m);
  }
  std::sort(marks.begin(), marks.end(), [&](double a, double b) { return sgn * a < sgn * b; });
  std::size_t next_mark = 0;

  const double h12_0 = sobolev_norm(s.u, 0.5);
  std::optional<double> lambda_min;
  RunResult out{.final_state = s};
  if (observer && !observer(s, lambda_min)) {
    out.termination = Termination::observer_stop;
    return out;
  }
  const double eps = 1e-14 * std::max(1.0, std::abs(t_stop));

  // Consecutive nonlinear half-steps commute and add (|u| is invariant under
  // them), so they are merged and only flushed when a synchronized state is needed.
  CVec u(s.u.values().begin(), s.u.values().end());
  double t = s.t;
  long steps = s.step_count;
  double pending = 0.0;
  double dt_nominal = ev.adapt_dt(s, lambda_min, ctl.dt);
  double cached_dt = -1.0;
  CVec multiplier;
  long since_obs = 0;

  auto sync = [&]() {
    ev.nonlinear(u, pending);
    pending = 0.0;
    check_finite(u);
    s = SimulationState{t, SpectralField(ev.grid(), u), s.dt_last, steps};
  };

  try {
    while (sgn * (t_stop - t) > eps) {
      double dt = dt_nominal;
      bool at_mark = false;
      const double target = next_mark < marks.size() ? marks[next_mark] : t_stop;
      if (dt >= sgn * (target - t) - eps) {
        dt = sgn * (target - t);
        at_mark = next_mark < marks.size();
      }
      ev.nonlinear(u, pending + 0.5 * sgn * dt);
      if (dt != cached_dt) {
        multiplier = ev.linear_multiplier(sgn * dt);
        cached_dt = dt;
      }
      ev.linear(u, multiplier);
      pending = 0.5 * sgn * dt;
      t += sgn * dt;
      ++steps;
      s.dt_last = dt;
      if (at_mark) {
        t = marks[next_mark];
        ++next_mark;
      } else if (std::abs(t - t_stop) <= eps) {
        t = t_stop;
      }
      ++since_obs;
      const bool final_step = t == t_stop;
      const bool observe = marks.empty() ? (since_obs >= ctl.observer_stride || final_step) : (at_mark || final_step);
      if (!observe && steps % 16 != 0) continue;
      sync();
      if (observe) {
        since_obs = 0;
        if (observer && !observer(s, lambda_min)) {
          out.termination = Termination::observer_stop;
          break;
        }
      }
      // The spectral checks cost a transform, so they run at observations and every 16 steps.
      std::optional<double> est = lambda_min;
      if (!est && ctl.q0 > 0.0) est = lambda_from_amplitude(s.u, ctl.q0);
      auto bc = blowup_detected(s, h12_0, est, ctl.blowup);
      if (bc.detected) {
        out.termination = Termination::blowup;
        out.detail = bc.reason;
        break;
      }
      dt_nominal = ev.adapt_dt(s, lambda_min, ctl.dt);
    }
    if (pending != 0.0) sync();
  } catch (const NumericalError& e) {
    out.termination = Termination::numerical_error;
    out.detail = e.what();
  }
  out.final_state = s;
  out.steps = s.step_count;
  return out;
}

}  // namespace hwb
