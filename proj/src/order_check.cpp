#include "order_check.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "integrator.hpp"
#include "matrix.hpp"
#include "system.hpp"

namespace iisim {

namespace {

// x' = a x + b x(t-1), expressed through one constant unit input channel so
// the delayed term rides on the bilinear coupling.
BilinearSystem delay_feedback_system(double a, double b) {
  BilinearSystem s;
  s.n = 1;
  s.q = 1;
  s.A = Matrix::from_rows({{a}});
  s.A_list = {Matrix(1, 1)};
  s.B_list = {Matrix::from_rows({{b}})};
  s.C = Matrix(1, 1);
  s.D = Matrix(1, 1);
  s.E = Matrix(1, 1);
  s.F = Matrix(1, 1);
  s.r = 1.0;
  return s;
}

BilinearSystem plain_decay_system(double a) {
  BilinearSystem s;
  s.n = 1;
  s.A = Matrix::from_rows({{a}});
  s.D = Matrix(1, 1);
  s.E = Matrix(1, 1);
  return s;
}

InputSignal unit_input() {
  ChannelSignal ch;
  ch.kind = SignalKind::constant;
  ch.value = 1.0;
  InputSignal sig;
  sig.channels = {ch};
  return sig;
}

InitialFunction constant_history(double v) {
  InitialFunction phi;
  phi.kind = InitialFunction::Kind::constant;
  phi.value = {v};
  return phi;
}

double endpoint(const BilinearSystem& sys, const InputSignal& input,
                const InitialFunction& phi, double T, double h) {
  const ImpulseSchedule no_impulses;
  const Trajectory traj = simulate(sys, input, phi, no_impulses, 0.0, T, h);
  return traj.states.back()[0];
}

double min_richardson_order(const std::vector<double>& errors) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double denom = std::max(errors[i + 1], 1e-300);
    worst = std::min(worst, std::log2(errors[i] / denom));
  }
  return worst;
}

bool strictly_decreasing(const std::vector<double>& errors) {
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (!(errors[i + 1] < errors[i])) return false;
  }
  return true;
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

}  // namespace

OrderCheckResult run_order_check(double base_h) {
  if (!(base_h > 0.0) || !std::isfinite(base_h)) {
    throw Error::invalid_argument("order check: base step must be positive");
  }
  std::vector<double> ladder;
  for (int i = 0; i < 4; ++i) ladder.push_back(base_h / static_cast<double>(1 << i));

  const BilinearSystem pure = delay_feedback_system(0.0, 1.0);
  const BilinearSystem plain = plain_decay_system(-2.0);
  const BilinearSystem mixed = delay_feedback_system(-2.0, 1.0);
  const ImpulseSchedule no_impulses;

  // Reject a ladder the grids cannot carry before integrating anything.
  for (double h : ladder) {
    validate_grid(pure, no_impulses, 0.0, 2.0, h);
    validate_grid(plain, no_impulses, 0.0, 1.0, h);
    validate_grid(mixed, no_impulses, 0.0, 2.0, h);
  }

  OrderCheckResult result;

  ConvergenceStudy repro;
  repro.name = "pure-delay reproduction";
  repro.problem = "x' = x(t-1), phi = 1, T = 2";
  repro.rule = "every error <= 1e-10 (piecewise-polynomial solution)";
  repro.exact = 3.5;
  repro.observed_order = std::numeric_limits<double>::quiet_NaN();
  repro.pass = true;
  for (double h : ladder) {
    const double err =
        std::abs(endpoint(pure, unit_input(), constant_history(1.0), 2.0, h) - repro.exact);
    repro.steps.push_back(h);
    repro.errors.push_back(err);
    if (!(err <= 1e-10)) repro.pass = false;
  }
  result.studies.push_back(std::move(repro));

  ConvergenceStudy decay;
  decay.name = "delay-free decay";
  decay.problem = "x' = -2x, x(0) = 2, T = 1";
  decay.rule = "observed order >= 3.5";
  decay.exact = 2.0 * std::exp(-2.0);
  for (double h : ladder) {
    const InputSignal none;
    const double err =
        std::abs(endpoint(plain, none, constant_history(2.0), 1.0, h) - decay.exact);
    decay.steps.push_back(h);
    decay.errors.push_back(err);
  }
  decay.observed_order = min_richardson_order(decay.errors);
  decay.pass = decay.observed_order >= 3.5;
  result.studies.push_back(std::move(decay));

  ConvergenceStudy delayed;
  delayed.name = "delayed decay";
  delayed.problem = "x' = -2x + x(t-1), phi = 1, T = 2";
  delayed.rule = "observed order >= 2.5 and strictly decreasing errors";
  // Method of steps: x(2) = 1/4 + (3/4) e^{-2} + (1/2) e^{-4}.
  delayed.exact = 0.25 + 0.75 * std::exp(-2.0) + 0.5 * std::exp(-4.0);
  for (double h : ladder) {
    const double err =
        std::abs(endpoint(mixed, unit_input(), constant_history(1.0), 2.0, h) - delayed.exact);
    delayed.steps.push_back(h);
    delayed.errors.push_back(err);
  }
  delayed.observed_order = min_richardson_order(delayed.errors);
  delayed.pass = delayed.observed_order >= 2.5 && strictly_decreasing(delayed.errors);
  result.studies.push_back(std::move(delayed));

  result.pass = true;
  for (const ConvergenceStudy& s : result.studies) result.pass = result.pass && s.pass;
  return result;
}

std::string order_check_table(const OrderCheckResult& result) {
  std::string out;
  for (const ConvergenceStudy& s : result.studies) {
    out += s.name + ": " + s.problem + "\n";
    out += "           h        error    order\n";
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      out += fmt("  %10.4e", s.steps[i]) + fmt("  %9.3e", s.errors[i]);
      if (i > 0 && std::isfinite(s.observed_order)) {
        const double denom = std::max(s.errors[i], 1e-300);
        out += fmt("  %7.2f", std::log2(s.errors[i - 1] / denom));
      } else {
        out += "       --";
      }
      out += "\n";
    }
    if (std::isfinite(s.observed_order)) {
      out += fmt("  observed order %.2f", s.observed_order);
    } else {
      double worst = 0.0;
      for (double e : s.errors) worst = std::max(worst, e);
      out += fmt("  max error %.3e", worst);
    }
    out += std::string(" (") + s.rule + "): " + (s.pass ? "PASS" : "FAIL") + "\n\n";
  }
  out += std::string("order check: ") + (result.pass ? "PASS" : "FAIL") + "\n";
  return out;
}

std::string order_check_json(const OrderCheckResult& result) {
  nlohmann::ordered_json j;
  j["pass"] = result.pass;
  nlohmann::ordered_json studies = nlohmann::ordered_json::array();
  for (const ConvergenceStudy& s : result.studies) {
    nlohmann::ordered_json study;
    study["name"] = s.name;
    study["problem"] = s.problem;
    study["rule"] = s.rule;
    study["exact"] = s.exact;
    study["steps"] = s.steps;
    study["errors"] = s.errors;
    // NaN (reproduction study) serializes as null.
    study["observed_order"] = s.observed_order;
    study["pass"] = s.pass;
    studies.push_back(std::move(study));
  }
  j["studies"] = std::move(studies);
  return j.dump(2) + "\n";
}

}  // namespace iisim
