#include "system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "errors.hpp"

namespace iisim {

namespace {

void require_matrix(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error::dimension(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                           std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()));
  }
  if (!m.all_finite()) {
    throw Error::invalid_argument(std::string(what) + ": entries must be finite");
  }
}

void require_strictly_increasing(const std::vector<double>& ts, const char* what) {
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (!(ts[i] < ts[i + 1])) {
      throw Error::invalid_argument(std::string(what) + ": times must be strictly increasing");
    }
  }
}

// Index of the tabulation segment containing t: largest i with times[i] <= t,
// clamped to a valid segment start.
std::size_t segment_index(const std::vector<double>& times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  if (i + 1 >= times.size()) i = times.size() - 2;
  return i;
}

}  // namespace

void BilinearSystem::validate() const {
  if (n == 0) throw Error::invalid_argument("system: state dimension must be positive");
  require_matrix(A, n, n, "system.A");
  if (A_list.size() != q) {
    throw Error::dimension("system.A_list: expected " + std::to_string(q) + " matrices, got " +
                           std::to_string(A_list.size()));
  }
  if (B_list.size() != q) {
    throw Error::dimension("system.B_list: expected " + std::to_string(q) + " matrices, got " +
                           std::to_string(B_list.size()));
  }
  for (std::size_t i = 0; i < q; ++i) {
    require_matrix(A_list[i], n, n, "system.A_list");
    require_matrix(B_list[i], n, n, "system.B_list");
  }
  if (q == 0) {
    // Input-free systems carry no C or F at all.
    if (!C.empty()) throw Error::dimension("system.C: expected empty for q = 0");
    if (!F.empty()) throw Error::dimension("system.F: expected empty for q = 0");
  } else {
    require_matrix(C, n, q, "system.C");
    require_matrix(F, n, q, "system.F");
  }
  require_matrix(D, n, n, "system.D");
  require_matrix(E, n, n, "system.E");
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw Error::invalid_argument("system.r: delay must be finite and nonnegative");
  }
  if (!(d >= 0.0) || !std::isfinite(d)) {
    throw Error::invalid_argument("system.d: delay must be finite and nonnegative");
  }
}

double ChannelSignal::eval(double t, Side side) const {
  switch (kind) {
    case SignalKind::zero:
      return 0.0;
    case SignalKind::constant:
      return value;
    case SignalKind::inverse_square: {
      const double u = t - offset;
      if (u == 0.0) {
        throw Error::domain("input: inverse_square signal evaluated at its singularity t = " +
                            std::to_string(offset));
      }
      return amplitude / (u * u);
    }
    case SignalKind::exp_decay:
      return amplitude * std::exp(-rate * t);
    case SignalKind::piecewise_constant: {
      // values[i] holds on [times[i-1], times[i]); the left value at a
      // breakpoint is the preceding segment's.
      auto it = (side == Side::right) ? std::upper_bound(times.begin(), times.end(), t)
                                      : std::lower_bound(times.begin(), times.end(), t);
      return values[static_cast<std::size_t>(it - times.begin())];
    }
    case SignalKind::tabulated: {
      if (t <= times.front()) return values.front();
      if (t >= times.back()) return values.back();
      const std::size_t i = segment_index(times, t);
      const double w = (t - times[i]) / (times[i + 1] - times[i]);
      return values[i] + w * (values[i + 1] - values[i]);
    }
  }
  throw Error::invalid_argument("input: unknown signal kind");
}

void ChannelSignal::validate() const {
  switch (kind) {
    case SignalKind::zero:
    case SignalKind::constant:
      break;
    case SignalKind::inverse_square:
    case SignalKind::exp_decay:
      if (!std::isfinite(amplitude) || !std::isfinite(offset) || !std::isfinite(rate)) {
        throw Error::invalid_argument("input: signal parameters must be finite");
      }
      break;
    case SignalKind::piecewise_constant:
      if (values.size() != times.size() + 1) {
        throw Error::invalid_argument(
            "input: piecewise_constant needs one more value than breakpoints");
      }
      require_strictly_increasing(times, "input: piecewise_constant");
      break;
    case SignalKind::tabulated:
      if (times.size() < 2 || values.size() != times.size()) {
        throw Error::invalid_argument("input: tabulated signal needs matching times and values");
      }
      require_strictly_increasing(times, "input: tabulated");
      break;
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error::invalid_argument("input: signal values must be finite");
  }
}

InputSignal InputSignal::zero(std::size_t q) {
  InputSignal sig;
  sig.channels.resize(q);
  return sig;
}

void InputSignal::validate() const {
  for (const ChannelSignal& c : channels) c.validate();
}

Vec eval_input(const InputSignal& sig, double t, Side side) {
  Vec w(sig.channels.size());
  for (std::size_t i = 0; i < sig.channels.size(); ++i) {
    w[i] = sig.channels[i].eval(t, side);
  }
  return w;
}

std::size_t InitialFunction::dimension() const {
  if (kind == Kind::constant) return value.size();
  return values.empty() ? 0 : values.front().size();
}

Vec InitialFunction::eval(double s) const {
  if (kind == Kind::constant) return value;
  if (s <= times.front()) return values.front();
  if (s >= times.back()) return values.back();
  const std::size_t i = segment_index(times, s);
  const double w = (s - times[i]) / (times[i + 1] - times[i]);
  Vec out = values[i];
  vec_axpy(out, w, vec_sub(values[i + 1], values[i]));
  return out;
}

double InitialFunction::sup_norm() const {
  if (kind == Kind::constant) return vec_norm(value);
  double sup = 0.0;
  for (const Vec& v : values) sup = std::max(sup, vec_norm(v));
  return sup;
}

void InitialFunction::validate(std::size_t n, double max_delay) const {
  if (kind == Kind::constant) {
    if (value.size() != n) {
      throw Error::dimension("initial: expected state dimension " + std::to_string(n));
    }
    if (!vec_all_finite(value)) throw Error::invalid_argument("initial: values must be finite");
    return;
  }
  if (times.size() < 2 || values.size() != times.size()) {
    throw Error::invalid_argument("initial: tabulated history needs matching times and values");
  }
  require_strictly_increasing(times, "initial");
  if (times.front() > -max_delay + 1e-12 || times.back() < -1e-12 || times.back() > 1e-12) {
    throw Error::invalid_argument("initial: tabulated history must cover [-max_delay, 0]");
  }
  for (const Vec& v : values) {
    if (v.size() != n) {
      throw Error::dimension("initial: expected state dimension " + std::to_string(n));
    }
    if (!vec_all_finite(v)) throw Error::invalid_argument("initial: values must be finite");
  }
}

void ImpulseSchedule::validate(double t0) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) {
      throw Error::invalid_argument("schedule: impulse times must be finite");
    }
    if (i == 0 ? !(times[i] > t0) : !(times[i] > times[i - 1])) {
      throw Error::invalid_argument(
          "schedule: impulse times must be strictly increasing and after t0");
    }
  }
  if (declared.kind == ScheduleClass::Kind::arbitrary || times.empty()) return;
  const GapStats gaps = classify_schedule(*this, t0);
  // Declared dwell bounds are promises about the actual gaps; a tiny
  // tolerance absorbs roundoff in generated schedules.
  const double tol = 1e-9 * std::max(1.0, declared.delta);
  if (declared.kind == ScheduleClass::Kind::inf_dwell && gaps.inf_gap < declared.delta - tol) {
    throw Error::invalid_argument("schedule: gap " + std::to_string(gaps.inf_gap) +
                                  " violates declared minimum dwell time " +
                                  std::to_string(declared.delta));
  }
  if (declared.kind == ScheduleClass::Kind::sup_dwell && gaps.sup_gap > declared.delta + tol) {
    throw Error::invalid_argument("schedule: gap " + std::to_string(gaps.sup_gap) +
                                  " violates declared maximum dwell time " +
                                  std::to_string(declared.delta));
  }
}

GapStats classify_schedule(const ImpulseSchedule& s, double t0) {
  GapStats out;
  if (s.times.empty()) {
    out.inf_gap = std::numeric_limits<double>::infinity();
    out.sup_gap = 0.0;
    out.degenerate = true;
    return out;
  }
  double prev = t0;
  out.inf_gap = std::numeric_limits<double>::infinity();
  out.sup_gap = 0.0;
  for (double t : s.times) {
    const double gap = t - prev;
    if (!(gap > 0.0)) {
      throw Error::invalid_argument(
          "schedule: impulse times must be strictly increasing and after t0");
    }
    out.inf_gap = std::min(out.inf_gap, gap);
    out.sup_gap = std::max(out.sup_gap, gap);
    prev = t;
  }
  return out;
}

ImpulseSchedule make_schedule_uniform(double t0, double delta, double horizon) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error::invalid_argument("schedule: dwell time must be positive");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw Error::invalid_argument("schedule: horizon must be nonnegative");
  }
  ImpulseSchedule s;
  const double end = t0 + horizon;
  const double tol = 1e-9 * std::max(1.0, std::abs(end));
  // t0 + k*delta rather than accumulation, so long schedules don't drift.
  for (std::size_t k = 1;; ++k) {
    const double t = t0 + static_cast<double>(k) * delta;
    if (t > end + tol) break;
    s.times.push_back(t);
  }
  return s;
}

ImpulseSchedule make_schedule_random(double t0, double delta_min, double delta_max, double horizon,
                                     std::uint64_t seed) {
  if (!(delta_min > 0.0) || !(delta_max >= delta_min) || !std::isfinite(delta_max)) {
    throw Error::invalid_argument("schedule: need 0 < delta_min <= delta_max");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw Error::invalid_argument("schedule: horizon must be nonnegative");
  }
  ImpulseSchedule s;
  std::mt19937_64 rng(seed);
  const double end = t0 + horizon;
  const double tol = 1e-9 * std::max(1.0, std::abs(end));
  double t = t0;
  for (;;) {
    // Top 53 bits, scaled: identical streams on every platform, unlike
    // std::uniform_real_distribution.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    t += delta_min + (delta_max - delta_min) * u;
    if (t > end + tol) break;
    s.times.push_back(t);
  }
  return s;
}

}  // namespace iisim
