#include "integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "errors.hpp"

namespace iisim {

namespace {

constexpr double kBlowUpNorm = 1e12;
constexpr std::size_t kMaxNodes = 50'000'000;

bool divides(double h, double length) {
  const double u = length / h;
  return std::abs(u - std::round(u)) <= 1e-9 * std::max(1.0, std::abs(u));
}

// Largest step no bigger than h that divides length exactly.
double dividing_step(double h, double length) {
  return length / std::max(1.0, std::ceil(length / h - 1e-12));
}

std::size_t nearest_node(double t, double t0, double h, std::size_t last) {
  const double u = (t - t0) / h;
  double k = std::round(u);
  if (k < 0.0) k = 0.0;
  const double cap = static_cast<double>(last);
  if (k > cap) k = cap;
  return static_cast<std::size_t>(k);
}

// Right-hand side of the continuous dynamics; the delay term is read from
// the trajectory built so far (or the stage state itself when r = 0).
struct Dynamics {
  const BilinearSystem& sys;
  const InputSignal& input;
  const InitialFunction& phi;
  const Trajectory& traj;

  Vec operator()(double t, const Vec& x, Side side) const {
    const Vec w = eval_input(input, t, side);
    const Vec xr = sys.r == 0.0 ? x : sample_history(traj, phi, t - sys.r, side);
    Vec dx = sys.A.apply(x);
    for (std::size_t i = 0; i < sys.q; ++i) {
      if (w[i] == 0.0) continue;
      vec_axpy(dx, w[i], sys.A_list[i].apply(x));
      vec_axpy(dx, w[i], sys.B_list[i].apply(xr));
    }
    if (sys.q > 0) vec_axpy(dx, 1.0, sys.C.apply(w));
    return dx;
  }
};

}  // namespace

const ImpulseRecord* Trajectory::impulse_at(std::size_t node) const {
  auto it = std::lower_bound(impulses.begin(), impulses.end(), node,
                             [](const ImpulseRecord& rec, std::size_t k) { return rec.node < k; });
  if (it != impulses.end() && it->node == node) return &*it;
  return nullptr;
}

Vec Trajectory::value(double t, Side side) const {
  if (times.empty()) throw Error::precondition("trajectory: no nodes");
  const std::size_t last = times.size() - 1;
  const double u = (t - t0) / h;
  const double k = std::round(u);
  if (std::abs(u - k) <= 1e-9 * std::max(1.0, std::abs(u))) {
    const std::size_t node = nearest_node(t, t0, h, last);
    if (side == Side::left) {
      if (const ImpulseRecord* rec = impulse_at(node)) return rec->pre_state;
    }
    return states[node];
  }
  if (u < 0.0 || u > static_cast<double>(last)) {
    throw Error::domain("trajectory: lookup at t = " + std::to_string(t) +
                        " is outside [" + std::to_string(t0) + ", " + std::to_string(t_end()) +
                        "]");
  }
  const std::size_t i = static_cast<std::size_t>(u);
  const double theta = (t - times[i]) / h;
  const Vec& y0 = states[i];
  const Vec& d0 = derivs[i];
  const ImpulseRecord* rec = impulse_at(i + 1);
  const Vec& y1 = rec ? rec->pre_state : states[i + 1];
  const Vec& d1 = rec ? rec->pre_deriv : derivs[i + 1];

  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  Vec out(y0.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = h00 * y0[j] + h * h10 * d0[j] + h01 * y1[j] + h * h11 * d1[j];
  }
  return out;
}

Vec sample_history(const Trajectory& traj, const InitialFunction& phi, double t, Side side) {
  if (t < traj.t0) return phi.eval(t - traj.t0);
  return traj.value(t, side);
}

void validate_grid(const BilinearSystem& sys, const ImpulseSchedule& schedule, double t0, double T,
                   double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error::invalid_argument("grid: step size must be positive");
  }
  if (!(T >= t0) || !std::isfinite(T) || !std::isfinite(t0)) {
    throw Error::invalid_argument("grid: need a finite horizon with T >= t0");
  }
  const auto check = [h](double length, const char* what) {
    if (length > 0.0 && !divides(h, length)) {
      throw Error::config("grid: h = " + std::to_string(h) + " does not divide " + what + " = " +
                          std::to_string(length) + "; try h = " +
                          std::to_string(dividing_step(h, length)));
    }
  };
  check(sys.r, "delay r");
  check(sys.d, "delay d");
  check(T - t0, "the horizon T - t0");
  const double t_tol = 1e-9 * std::max(1.0, std::abs(T));
  long long prev_node = -1;
  for (double tk : schedule.times) {
    if (tk > T + t_tol) break;
    if (!divides(h, tk - t0)) {
      throw Error::config("grid: h = " + std::to_string(h) + " does not divide impulse offset " +
                          std::to_string(tk - t0) + "; try h = " +
                          std::to_string(dividing_step(h, tk - t0)));
    }
    const long long node = static_cast<long long>(std::round((tk - t0) / h));
    if (node == prev_node) {
      throw Error::config("grid: impulse times " + std::to_string(tk) +
                          " and earlier collide on one node; shrink h or space the impulses");
    }
    prev_node = node;
  }
  const double n_steps = (T - t0) / h;
  if (n_steps > static_cast<double>(kMaxNodes)) {
    throw Error::invalid_argument("grid: " + std::to_string(n_steps) +
                                  " steps exceeds the node limit");
  }
}

Trajectory simulate(const BilinearSystem& sys, const InputSignal& input,
                    const InitialFunction& phi, const ImpulseSchedule& schedule, double t0,
                    double T, double h) {
  sys.validate();
  input.validate();
  if (input.dimension() != sys.q) {
    throw Error::dimension("simulate: input has " + std::to_string(input.dimension()) +
                           " channels, system expects " + std::to_string(sys.q));
  }
  phi.validate(sys.n, sys.max_delay());
  schedule.validate(t0);
  validate_grid(sys, schedule, t0, T, h);

  const std::size_t n_steps = static_cast<std::size_t>(std::round((T - t0) / h));

  Trajectory traj;
  traj.t0 = t0;
  traj.h = h;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.derivs.reserve(n_steps + 1);

  // Impulse node indices within the horizon.
  std::vector<std::size_t> impulse_nodes;
  const double t_tol = 1e-9 * std::max(1.0, std::abs(T));
  for (double tk : schedule.times) {
    if (tk > T + t_tol) break;
    impulse_nodes.push_back(static_cast<std::size_t>(std::round((tk - t0) / h)));
  }
  std::size_t next_impulse = 0;

  const Dynamics f{sys, input, phi, traj};

  traj.times.push_back(t0);
  traj.states.push_back(phi.eval(0.0));
  traj.derivs.push_back(f(t0, traj.states[0], Side::right));

  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = traj.times[i];
    const double t_next = t0 + static_cast<double>(i + 1) * h;
    const Vec& x = traj.states[i];

    // The first stage matches the stored right-side derivative at node i.
    const Vec& k1 = traj.derivs[i];
    Vec x2 = x;
    vec_axpy(x2, 0.5 * h, k1);
    const Vec k2 = f(t + 0.5 * h, x2, Side::right);
    Vec x3 = x;
    vec_axpy(x3, 0.5 * h, k2);
    const Vec k3 = f(t + 0.5 * h, x3, Side::right);
    Vec x4 = x;
    vec_axpy(x4, h, k3);
    // The end stage takes left limits: the step must not see values from
    // beyond a discontinuity sitting exactly on its right endpoint.
    const Vec k4 = f(t_next, x4, Side::left);

    Vec x_pre = x;
    vec_axpy(x_pre, h / 6.0, k1);
    vec_axpy(x_pre, h / 3.0, k2);
    vec_axpy(x_pre, h / 3.0, k3);
    vec_axpy(x_pre, h / 6.0, k4);

    if (next_impulse < impulse_nodes.size() && impulse_nodes[next_impulse] == i + 1) {
      ++next_impulse;
      ImpulseRecord rec;
      rec.node = i + 1;
      rec.pre_state = x_pre;
      rec.pre_deriv = f(t_next, x_pre, Side::left);

      const Vec w_pre = eval_input(input, t_next, Side::left);
      // x(t - d) is the solution value (right limit) for d > 0; a delay-free
      // jump reads the left limit at the impulse itself.
      const Vec xd =
          sys.d > 0.0 ? sample_history(traj, phi, t_next - sys.d, Side::right) : x_pre;

      Vec post = x_pre;
      vec_axpy(post, 1.0, sys.D.apply(x_pre));
      vec_axpy(post, 1.0, sys.E.apply(xd));
      if (sys.q > 0) vec_axpy(post, 1.0, sys.F.apply(w_pre));

      rec.post_state = post;
      traj.impulses.push_back(std::move(rec));
      traj.times.push_back(t_next);
      traj.states.push_back(std::move(post));
    } else {
      traj.times.push_back(t_next);
      traj.states.push_back(std::move(x_pre));
    }

    const Vec& settled = traj.states[i + 1];
    if (!vec_all_finite(settled) || vec_norm(settled) > kBlowUpNorm) {
      traj.blew_up = true;
      traj.blow_up_time = t_next;
      traj.derivs.push_back(Vec(settled.size(), 0.0));
      break;
    }
    traj.derivs.push_back(f(t_next, settled, Side::right));
  }
  return traj;
}

namespace {

void append_value(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += ',';
  line += buf;
}

void write_row(std::ostream& out, double t, const Vec& x, const Vec& w) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", t);
  std::string line = buf;
  for (double v : x) append_value(line, v);
  for (double v : w) append_value(line, v);
  line += '\n';
  out << line;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const InputSignal& input) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  std::string header = "t";
  for (std::size_t j = 0; j < n; ++j) header += ",x" + std::to_string(j + 1);
  for (std::size_t j = 0; j < input.dimension(); ++j) header += ",w" + std::to_string(j + 1);
  out << header << '\n';
  for (std::size_t i = 0; i < traj.node_count(); ++i) {
    if (const ImpulseRecord* rec = traj.impulse_at(i)) {
      write_row(out, traj.times[i], rec->pre_state, eval_input(input, traj.times[i], Side::left));
    }
    write_row(out, traj.times[i], traj.states[i], eval_input(input, traj.times[i], Side::right));
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const InputSignal& input) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error::io("cannot open " + path + " for writing");
  write_trajectory_csv(out, traj, input);
  out.flush();
  if (!out) throw Error::io("failed writing " + path);
}

}  // namespace iisim
