#pragma once

#include <string>
#include <vector>

namespace iisim {

// One convergence study: a reference problem with a closed-form endpoint
// value, integrated across a halving ladder of step sizes.
struct ConvergenceStudy {
  std::string name;
  std::string problem;  // the equation, initial data, and horizon
  std::string rule;     // human-readable pass rule
  double exact = 0.0;   // closed-form endpoint value
  std::vector<double> steps;
  std::vector<double> errors;
  // min Richardson order over consecutive rungs; NaN for the reproduction
  // study, whose errors are pure roundoff.
  double observed_order = 0.0;
  bool pass = false;
};

struct OrderCheckResult {
  std::vector<ConvergenceStudy> studies;
  bool pass = false;
};

// Runs the integrator's three reference studies on the halving ladder
// {base_h, base_h/2, base_h/4, base_h/8}:
//
//   * pure-delay reproduction: x' = x(t-1) with unit history has a
//     piecewise-polynomial solution that fourth-order steps plus cubic
//     Hermite history reproduce exactly, so every rung must hit the
//     method-of-steps value x(2) = 3.5 to within roundoff;
//   * delay-free decay: x' = -2x against 2 e^{-2} must show order >= 3.5;
//   * delayed decay: x' = -2x + x(t-1) against its method-of-steps endpoint
//     must show order >= 2.5 with strictly decreasing errors.
//
// Every rung is grid-checked against the delays and horizons up front, so a
// base_h that cannot represent the unit delay throws before any integration.
OrderCheckResult run_order_check(double base_h = 1e-2);

// Fixed-width table for terminal output, one block per study.
std::string order_check_table(const OrderCheckResult& result);

// The same data as JSON: {"pass": ..., "studies": [...]}.
std::string order_check_json(const OrderCheckResult& result);

}  // namespace iisim
