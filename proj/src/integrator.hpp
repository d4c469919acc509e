#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "system.hpp"

namespace iisim {

// State jump applied at one grid node. pre_* capture the limit from the left,
// which interpolation needs to stay one-sided across the jump.
struct ImpulseRecord {
  std::size_t node = 0;
  Vec pre_state;
  Vec pre_deriv;
  Vec post_state;
};

// Fixed-grid solution record. states/derivs hold the right-continuous value
// and right-side derivative at each node; left limits at impulse nodes live
// in the impulse records.
struct Trajectory {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> derivs;
  std::vector<ImpulseRecord> impulses;
  bool blew_up = false;
  double blow_up_time = 0.0;

  std::size_t node_count() const { return times.size(); }
  double t_end() const { return times.empty() ? t0 : times.back(); }

  // Impulse record at a node, or nullptr.
  const ImpulseRecord* impulse_at(std::size_t node) const;

  // Solution value at t in [t0, t_end]: exact at nodes, cubic Hermite in
  // between, with the interpolation bracket clipped one-sided at impulses.
  Vec value(double t, Side side) const;
};

// Trajectory lookup that falls back to the initial function for t < t0.
Vec sample_history(const Trajectory& traj, const InitialFunction& phi, double t, Side side);

// Checks that h divides the delays, the horizon, and every impulse offset
// (relative tolerance 1e-9), and that impulse times are at least one step
// apart. Throws a config error with a workable step size on failure.
void validate_grid(const BilinearSystem& sys, const ImpulseSchedule& schedule, double t0, double T,
                   double h);

// Classical fixed-step fourth-order Runge-Kutta between impulses; the delay
// terms are read from the already-computed history, which stays ahead of the
// stages because h divides r. Jumps are applied after the step that lands on
// an impulse node. Integration stops early (blew_up flag) if the state norm
// passes 1e12 or turns non-finite.
Trajectory simulate(const BilinearSystem& sys, const InputSignal& input,
                    const InitialFunction& phi, const ImpulseSchedule& schedule, double t0,
                    double T, double h);

// One row per node (time, state, input); impulse nodes get two rows, the
// left limit first. Values are written with 17 significant digits so reruns
// are byte-identical.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const InputSignal& input);
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const InputSignal& input);

}  // namespace iisim
