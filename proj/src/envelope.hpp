#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "integrator.hpp"
#include "matrix.hpp"
#include "system.hpp"

namespace iisim {

// Which decay/dwell tradeoff the envelope certifies: a decaying flow with a
// minimum dwell time, a decaying flow under arbitrary schedules, or a
// growing flow held down by frequent contracting jumps.
enum class EnvelopeRegime { decay_min_dwell, decay_all, growth_max_dwell };

const char* regime_name(EnvelopeRegime regime);

// Everything needed to evaluate the certified decay envelope along a
// trajectory. Built from the system and two slack parameters; all the gains
// are explicit so reports can echo them.
struct EnvelopeParams {
  EnvelopeRegime regime = EnvelopeRegime::decay_all;
  double eps = 0.0;  // budget carved out of the flow estimate
  double xi = 0.0;   // slack in the jump-term splits

  Matrix P;  // quadratic weight (identity in the growth regime)
  double lambda_min_P = 1.0;
  double lambda_max_P = 1.0;

  double mu = 0.0;     // flow rate: decay (decay_*) or growth (growth_*)
  double kappa = 0.0;  // history-functional gain: v2 <= kappa * sup v1
  double rho1 = 0.0;   // jump gain on v1 at the impulse
  double rho2 = 0.0;   // jump gain on the windowed supremum of v1

  // chi(s) = max(chi1_lin s + chi1_quad s^2, chi2_quad s^2, chi3_quad s^2);
  // chi3 alone bounds the input contribution inside a jump.
  double chi1_lin = 0.0;
  double chi1_quad = 0.0;
  double chi2_quad = 0.0;
  double chi3_quad = 0.0;

  double alpha2_coeff = 0.0;  // initial-state weight: alpha2_coeff |phi(0)|^2
  double alpha3_coeff = 0.0;  // history weight: alpha3_coeff sup|phi|^2

  double r = 0.0;    // flow delay (window of the history functional)
  double tau = 0.0;  // max(r, d), the window of the jump condition
  double delta = 0.0;  // dwell bound the envelope rate was selected for

  double lambda_cap = 0.0;  // largest admissible envelope rate
  double lambda = 0.0;      // selected envelope rate (0.9 * lambda_cap)

  // Multipliers of the three envelope terms: m_alpha on the initial data,
  // c_int on the input integral, m_sum on the per-jump input sum.
  double m_alpha = 1.0;
  double c_int = 1.0;
  double m_sum = 1.0;
};

// Envelope construction for a Hurwitz drift. min_dwell selects the rate
// against gaps of at least delta; otherwise delta is ignored and the rate
// only has to respect the delay window. Throws a precondition error when
// the construction is infeasible (the jump gains outrun the flow).
EnvelopeParams build_decay_envelope(const BilinearSystem& sys, double eps, double xi,
                                    bool min_dwell, double delta);

// Envelope construction for an unstable drift under gaps of at most delta.
EnvelopeParams build_growth_envelope(const BilinearSystem& sys, double eps, double xi,
                                     double delta);

// Replaces the selected rate (keeping everything else), refreshing the
// multipliers that depend on it. Used to probe rates beyond the cap.
void override_lambda(EnvelopeParams& params, double lambda);

// Named parameter echo in derivation order.
std::vector<std::pair<std::string, double>> envelope_summary(const EnvelopeParams& params);

double eval_chi(const EnvelopeParams& params, double s);
double eval_v1(const EnvelopeParams& params, const Vec& x);

// Weighted sliding-window integral of |x|^2 over [t - r, t], by composite
// trapezoid on the grid with one-sided samples at the panel ends so jumps
// are never straddled. t must sit on the grid.
double eval_v2(const EnvelopeParams& params, const Trajectory& traj, const InitialFunction& phi,
               double t);

// Pointwise comparison of v = v1 + v2 against the certified envelope along
// the whole trajectory. Impulse nodes contribute two check points (left
// limit first), mirroring the trajectory records.
struct EnvelopeTrace {
  std::vector<double> times;
  std::vector<double> v;
  std::vector<double> rhs;
  std::vector<double> margin;  // rhs - v
  double min_margin = 0.0;
  double max_rhs = 0.0;
  double tolerance = 0.0;  // 1e-6 * (1 + max_rhs)
  bool violated = false;
  double first_violation_t = 0.0;
};

EnvelopeTrace eval_envelope(const Trajectory& traj, const InitialFunction& phi,
                            const InputSignal& input, const EnvelopeParams& params);

void write_envelope_csv(std::ostream& out, const EnvelopeTrace& trace);
void write_envelope_csv(const std::string& path, const EnvelopeTrace& trace);

// Direct verification of the discrete conditions behind the envelope.
struct ConditionCheck {
  bool holds = true;
  double worst = 0.0;  // largest lhs - rhs over all check points
  std::size_t count = 0;
};

// v1(x(t_k)) <= rho1 v1(x(t_k-)) + rho2 sup v1 over [t_k - tau, t_k]
//             + chi3(|w(t_k-)|) at every impulse.
ConditionCheck check_jump_inequality(const Trajectory& traj, const InitialFunction& phi,
                                     const InputSignal& input, const EnvelopeParams& params);

// v2(t) <= kappa * sup v1 over [t - tau, t] at every node.
ConditionCheck check_history_bound(const Trajectory& traj, const InitialFunction& phi,
                                   const EnvelopeParams& params);

}  // namespace iisim
