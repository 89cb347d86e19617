#pragma once

// Split-step Fourier integration of i u_t = D u - s |u|^2 u.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hwb/spectral.hpp"

namespace hwb {

enum class Direction { forward = 1, backward = -1 };

enum class Nonlinearity { focusing, defocusing, linear };

struct SimulationState {
  double t = 0.0;
  SpectralField u;
  double dt_last = 0.0;
  long step_count = 0;
};

struct Conserved {
  double mass = 0.0;
  double energy = 0.0;
  double momentum = 0.0;
};

struct DtPolicy {
  double c_dt = 0.02;
  double dt_max = 1e-3;
};

struct BlowupCheck {
  bool detected = false;
  std::string reason;  // "resolution", "norm", "spectral"
};

struct BlowupThresholds {
  double min_points = 4.0;       // lambda_est below this many spacings
  double norm_growth = 1e3;      // H^1/2 norm growth over the initial value
  double nyquist_fraction = 0.01;
};

class Evolver {
 public:
  explicit Evolver(Grid1D grid, Nonlinearity nl = Nonlinearity::focusing, bool dealias = false);

  // One Strang step N(dt/2) L(dt) N(dt/2).
  SimulationState step(const SimulationState& s, double dt, Direction dir) const;

  // c_dt * min(lambda_min, 1/|u|_inf^2), capped by dt_max.
  double adapt_dt(const SimulationState& s, std::optional<double> lambda_min, const DtPolicy& policy) const;

  const Grid1D& grid() const { return grid_; }

  // Raw substeps on sample vectors; tau and dt carry the direction sign.
  void nonlinear(CVec& u, double tau) const;
  // exp(-i dt |xi|)/n for the linear substep, dealiasing folded in.
  CVec linear_multiplier(double dt) const;
  void linear(CVec& u, const CVec& multiplier) const;

 private:

  Grid1D grid_;
  Nonlinearity nl_;
  bool dealias_;
  std::vector<double> abs_xi_;
};

Conserved conserved(const SpectralField& u);

// Scale estimate from the amplitude of a single ground-state bubble.
double lambda_from_amplitude(const SpectralField& u, double q0);

BlowupCheck blowup_detected(const SimulationState& s, double initial_h12, std::optional<double> lambda_est,
                            const BlowupThresholds& th = {});

enum class Termination { reached_t_stop, blowup, observer_stop, numerical_error };
std::string to_string(Termination t);

struct RunResult {
  SimulationState final_state;
  Termination termination = Termination::reached_t_stop;
  std::string detail{};
  long steps = 0;
};

struct RunControl {
  DtPolicy dt;
  long observer_stride = 10;
  BlowupThresholds blowup;
  double q0 = 0.0;  // Q(0), for the amplitude-based scale estimate; 0 disables it
  // Optional fixed times the integrator must land on exactly (observations).
  std::vector<double> landmarks;
};

// Returns false to stop the run. The observer also reports the current smallest
// bubble scale when it tracks one.
using Observer = std::function<bool(const SimulationState&, std::optional<double>& lambda_min)>;

RunResult run(const Evolver& ev, SimulationState s, double t_stop, const RunControl& ctl,
              const Observer& observer);

}  // namespace hwb
