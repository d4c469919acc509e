#pragma once

#include <cstdint>
#include <vector>

#include "matrix.hpp"

namespace iisim {

// Which one-sided value to take at a discontinuity. Solutions and
// piecewise-constant inputs are right-continuous; the left value at a jump is
// the limit from below.
enum class Side { left, right };

// x'(t) = A x + sum_i w_i(t) (A_i x + B_i x(t-r)) + C w(t) between impulses,
// with state jumps x(t_k) = (I+D) x(t_k-) + E x(t_k - d) + F w(t_k-).
struct BilinearSystem {
  std::size_t n = 0;  // state dimension
  std::size_t q = 0;  // input dimension
  Matrix A;                    // n x n
  std::vector<Matrix> A_list;  // q matrices, n x n
  std::vector<Matrix> B_list;  // q matrices, n x n
  Matrix C;                    // n x q
  Matrix D;                    // n x n
  Matrix E;                    // n x n
  Matrix F;                    // n x q
  double r = 0.0;  // delay in the continuous dynamics
  double d = 0.0;  // delay in the impulses

  double max_delay() const { return r > d ? r : d; }

  // Throws a dimension error naming the offending field.
  void validate() const;
};

// One scalar input channel.
enum class SignalKind { zero, constant, inverse_square, exp_decay, piecewise_constant, tabulated };

struct ChannelSignal {
  SignalKind kind = SignalKind::zero;
  double value = 0.0;      // constant
  double amplitude = 1.0;  // inverse_square, exp_decay
  double offset = 0.0;     // inverse_square: amplitude / (t - offset)^2
  double rate = 0.0;       // exp_decay: amplitude * exp(-rate * t)
  // piecewise_constant: values[0] before times[0], values[i] on [times[i-1], times[i]).
  // tabulated: linear interpolation through (times, values), clamped outside.
  std::vector<double> times;
  std::vector<double> values;

  double eval(double t, Side side) const;
  void validate() const;
};

// A q-dimensional input signal, stored channel by channel so the channels can
// be of different kinds.
struct InputSignal {
  std::vector<ChannelSignal> channels;

  std::size_t dimension() const { return channels.size(); }
  static InputSignal zero(std::size_t q);
  void validate() const;
};

Vec eval_input(const InputSignal& sig, double t, Side side);

// State history on [-max_delay, 0], anchored at t0 by the caller.
struct InitialFunction {
  enum class Kind { constant, tabulated };
  Kind kind = Kind::constant;
  Vec value;                        // constant
  std::vector<double> times;        // tabulated: nonpositive, strictly increasing
  std::vector<Vec> values;          // tabulated: one state per sample time

  std::size_t dimension() const;
  // phi(s) for s in [-max_delay, 0]; linear interpolation for tabulated data.
  Vec eval(double s) const;
  // sup of ||phi(s)|| over [-max_delay, 0] (attained at sample points).
  double sup_norm() const;
  void validate(std::size_t n, double max_delay) const;
};

// Dwell-time classes for impulse sequences: gaps bounded below (inf_dwell),
// bounded above (sup_dwell), or unconstrained (arbitrary).
struct ScheduleClass {
  enum class Kind { inf_dwell, sup_dwell, arbitrary };
  Kind kind = Kind::arbitrary;
  double delta = 0.0;
};

struct ImpulseSchedule {
  std::vector<double> times;  // strictly increasing, all > t0
  ScheduleClass declared;

  // Checks monotonicity, times > t0, and the declared class constraint
  // (gap bounds include t1 - t0). Throws on violation.
  void validate(double t0) const;
};

struct GapStats {
  double inf_gap = 0.0;  // +infinity convention when the schedule is empty
  double sup_gap = 0.0;
  bool degenerate = false;  // empty schedule
};

// Min and max consecutive gap, counting t1 - t0 as the first gap.
GapStats classify_schedule(const ImpulseSchedule& s, double t0);

// Times t0 + delta, t0 + 2*delta, ... up to t0 + horizon (inclusive within
// a 1e-9 relative tolerance).
ImpulseSchedule make_schedule_uniform(double t0, double delta, double horizon);

// Gaps drawn uniformly from [delta_min, delta_max]; deterministic per seed
// and identical across platforms (the generator bits are scaled directly).
ImpulseSchedule make_schedule_random(double t0, double delta_min, double delta_max,
                                     double horizon, std::uint64_t seed);

}  // namespace iisim
