#include "envelope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "errors.hpp"
#include "linalg.hpp"

namespace iisim {

namespace {

// Exponentials past this point overflow; the envelope reports a numeric
// error instead of returning inf.
constexpr double kExpGuard = 700.0;

double sq(double x) { return x * x; }

double guarded_exp(double arg, const char* what) {
  if (arg > kExpGuard) {
    throw Error::numeric(std::string("envelope: ") + what + " needs exp(" +
                         std::to_string(arg) + "), which overflows");
  }
  return std::exp(arg);
}

Matrix plus_identity(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += 1.0;
  return out;
}

// Jump gains from splitting |u + v + w|^2 <= rho1-part + rho2-part + input
// part, where a, b, f bound the three squared pieces. The split parameter
// balancing a against b minimizes rho1 + rho2 * b_weight; degenerate pieces
// skip the slack they do not need.
struct JumpSplit {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double chi3 = 0.0;
};

JumpSplit split_jump_gains(double a, double b, double f, double xi, double b_weight) {
  if (a == 0.0 && b == 0.0) return {0.0, 0.0, f};
  if (a == 0.0) return {0.0, (1.0 + xi) * b, (1.0 + 1.0 / xi) * f};
  if (b == 0.0) {
    if (f == 0.0) return {a, 0.0, 0.0};
    return {(1.0 + xi) * a, 0.0, (1.0 + 1.0 / xi) * f};
  }
  const double split = std::sqrt((1.0 + xi) * b * b_weight / a);
  return {(1.0 + split) * a, (1.0 + 1.0 / split) * (1.0 + xi) * b,
          (1.0 + 1.0 / split) * (1.0 + 1.0 / xi) * f};
}

void require_slacks(double eps, double xi, double eps_cap) {
  if (!(eps > 0.0) || !(eps < eps_cap)) {
    throw Error::invalid_argument("envelope: eps must lie in (0, " + std::to_string(eps_cap) +
                                  ")");
  }
  if (!(xi > 0.0)) throw Error::invalid_argument("envelope: xi must be positive");
}

// One-sided state sample at signed grid node j (j <= 0 reads the initial
// function, which is continuous).
Vec node_sample(const Trajectory& traj, const InitialFunction& phi, long long j, Side side) {
  if (j <= 0) return phi.eval(static_cast<double>(j) * traj.h);
  const std::size_t node = static_cast<std::size_t>(j);
  if (side == Side::left) {
    if (const ImpulseRecord* rec = traj.impulse_at(node)) return rec->pre_state;
  }
  return traj.states[node];
}

// Largest v1 over the window [t_node - window, t_node]: right-side values
// strictly inside, left limits everywhere but the window start.
double window_sup_v1(const EnvelopeParams& params, const Trajectory& traj,
                     const InitialFunction& phi, long long node, long long window_nodes) {
  double sup = 0.0;
  for (long long j = node - window_nodes; j <= node; ++j) {
    if (j < node) sup = std::max(sup, eval_v1(params, node_sample(traj, phi, j, Side::right)));
    if (j > node - window_nodes) {
      sup = std::max(sup, eval_v1(params, node_sample(traj, phi, j, Side::left)));
    }
  }
  return sup;
}

long long nodes_for(double length, double h) {
  return static_cast<long long>(std::llround(length / h));
}

}  // namespace

const char* regime_name(EnvelopeRegime regime) {
  switch (regime) {
    case EnvelopeRegime::decay_min_dwell: return "decay_min_dwell";
    case EnvelopeRegime::decay_all: return "decay_all";
    case EnvelopeRegime::growth_max_dwell: return "growth_max_dwell";
  }
  return "decay_all";
}

EnvelopeParams build_decay_envelope(const BilinearSystem& sys, double eps, double xi,
                                    bool min_dwell, double delta) {
  sys.validate();
  require_slacks(eps, xi, 1.0 / 3.0);
  if (min_dwell && !(delta > 0.0)) {
    throw Error::invalid_argument("envelope: a minimum dwell time must be positive");
  }
  if (!is_hurwitz(sys.A)) {
    throw Error::precondition("envelope: decay construction needs a Hurwitz drift matrix");
  }

  EnvelopeParams out;
  out.regime = min_dwell ? EnvelopeRegime::decay_min_dwell : EnvelopeRegime::decay_all;
  out.eps = eps;
  out.xi = xi;
  out.r = sys.r;
  out.tau = sys.max_delay();
  out.delta = min_dwell ? delta : 0.0;

  out.P = solve_lyapunov(sys.A);
  const SymEig pe = eig_sym(out.P);
  out.lambda_min_P = pe.lambda_min;
  out.lambda_max_P = pe.lambda_max;

  out.mu = (1.0 - 3.0 * eps) / pe.lambda_max;
  if (sys.r > 0.0) out.mu = std::min(out.mu, 1.0 / (2.0 * sys.r));
  out.kappa = sys.r > 0.0 ? 3.0 * sys.r * eps / (2.0 * pe.lambda_min) : 0.0;

  const Matrix id = plus_identity(sys.D);
  const double a = eig_sym(id.transposed() * out.P * id).lambda_max / pe.lambda_min;
  const double b = eig_sym(sys.E.transposed() * out.P * sys.E).lambda_max / pe.lambda_min;
  const double f =
      sys.q > 0 ? eig_sym(sys.F.transposed() * out.P * sys.F).lambda_max : 0.0;
  const double b_weight = guarded_exp(out.mu * out.tau, "the delayed jump weight");

  const JumpSplit split = split_jump_gains(a, b, f, xi, b_weight);
  out.rho1 = split.rho1;
  out.rho2 = split.rho2;
  out.chi3_quad = split.chi3;

  double p1 = 0.0, p2 = 0.0;
  for (std::size_t i = 0; i < sys.q; ++i) {
    p1 = std::max(p1, spectral_norm(out.P * sys.A_list[i]));
    p2 = std::max(p2, spectral_norm(out.P * sys.B_list[i]));
  }
  const double q = static_cast<double>(sys.q);
  out.chi1_lin = 2.0 * q * p1 / pe.lambda_min;
  out.chi1_quad = q * q * p2 * p2 / (eps * pe.lambda_min);
  out.chi2_quad = sys.q > 0 ? sq(spectral_norm(out.P * sys.C)) / eps : 0.0;

  out.alpha2_coeff = pe.lambda_max;
  out.alpha3_coeff = 2.0 * eps * sys.r;

  if (min_dwell) {
    // Composite jump multiplier over one dwell interval. The branch with a
    // contracting direct gain leans on the history functional.
    const double rho = out.rho1 >= 1.0
                           ? out.rho1 + out.rho2 * b_weight
                           : out.rho1 + (out.rho2 + (1.0 - out.rho1) * out.kappa) * b_weight;
    const double rho_env = std::max(rho, 1.0);
    out.c_int = rho_env;
    out.lambda_cap = out.mu - std::log(rho_env) / delta;
    if (out.lambda_cap < 0.0) {
      throw Error::precondition(
          "envelope: dwell time " + std::to_string(delta) +
          " is too small for the constructed jump gains (needs at least " +
          std::to_string(std::log(rho_env) / out.mu) + ")");
    }
  } else {
    if (out.rho2 == 0.0 ? out.rho1 > 1.0 : out.rho1 + out.rho2 > 1.0) {
      throw Error::precondition(
          "envelope: jump gains exceed break-even; arbitrary schedules are not certifiable "
          "with these slacks");
    }
    out.lambda_cap = out.mu;
    if (out.rho2 > 0.0 && out.tau > 0.0) {
      out.lambda_cap =
          std::min(out.mu, std::log((1.0 - out.rho1) / out.rho2) / out.tau);
    }
    out.c_int = std::max(1.0, out.rho1 + out.rho2 * b_weight);
  }
  out.lambda = 0.9 * out.lambda_cap;
  out.m_alpha = 1.0;
  out.m_sum = 1.0;
  return out;
}

EnvelopeParams build_growth_envelope(const BilinearSystem& sys, double eps, double xi,
                                     double delta) {
  sys.validate();
  require_slacks(eps, xi, std::numeric_limits<double>::infinity());
  if (!(delta > 0.0)) {
    throw Error::invalid_argument("envelope: a maximum dwell time must be positive");
  }

  EnvelopeParams out;
  out.regime = EnvelopeRegime::growth_max_dwell;
  out.eps = eps;
  out.xi = xi;
  out.r = sys.r;
  out.tau = sys.max_delay();
  out.delta = delta;

  out.P = Matrix::identity(sys.n);
  out.lambda_min_P = 1.0;
  out.lambda_max_P = 1.0;

  const double m = eig_sym(sys.A + sys.A.transposed()).lambda_max;
  out.mu = m + 2.0 * eps;
  if (!(out.mu > 0.0)) {
    throw Error::precondition("envelope: flow does not grow; use the decay construction");
  }
  out.kappa = eps * sys.r;

  const double a = sq(spectral_norm(plus_identity(sys.D)));
  const double b = sq(spectral_norm(sys.E));
  const double f = sys.q > 0 ? sq(spectral_norm(sys.F)) : 0.0;
  const JumpSplit split = split_jump_gains(a, b, f, xi, 1.0);
  out.rho1 = split.rho1;
  out.rho2 = split.rho2;
  out.chi3_quad = split.chi3;

  double p1 = 0.0, p2 = 0.0;
  for (std::size_t i = 0; i < sys.q; ++i) {
    p1 = std::max(p1, spectral_norm(sys.A_list[i] + sys.A_list[i].transposed()));
    p2 = std::max(p2, spectral_norm(sys.B_list[i]));
  }
  const double q = static_cast<double>(sys.q);
  out.chi1_lin = q * p1;
  out.chi1_quad = q * q * p2 * p2 / eps;
  out.chi2_quad = sys.q > 0 ? sq(spectral_norm(sys.C)) / eps : 0.0;

  out.alpha2_coeff = 1.0;
  out.alpha3_coeff = eps * sys.r;

  // Admissible rates satisfy
  //   (rho1 + [rho2 + (1 - rho1) kappa] e^{lambda tau}) e^{(mu + lambda) delta} <= 1;
  // the left side is increasing in lambda, so bisect after bracketing.
  const double coef = out.rho2 + (1.0 - out.rho1) * out.kappa;
  const auto admissible = [&](double lambda) {
    const double jump_arg = lambda * out.tau;
    const double flow_arg = (out.mu + lambda) * delta;
    if (jump_arg > kExpGuard || flow_arg > kExpGuard) return false;
    return (out.rho1 + coef * std::exp(jump_arg)) * std::exp(flow_arg) <= 1.0;
  };
  if (!admissible(0.0)) {
    throw Error::precondition(
        "envelope: dwell cap " + std::to_string(delta) +
        " is too large for the constructed jump gains; shrink the gaps or the slacks");
  }
  double lo = 0.0, hi = 1.0;
  while (admissible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) break;  // effectively unconstrained (full state resets)
  }
  for (int i = 0; i < 200 && hi - lo > 1e-10 * std::max(1.0, lo); ++i) {
    const double mid = 0.5 * (lo + hi);
    (admissible(mid) ? lo : hi) = mid;
  }
  out.lambda_cap = lo;
  out.lambda = 0.9 * out.lambda_cap;

  out.m_alpha = guarded_exp((out.mu + out.lambda) * delta, "the inter-impulse growth factor");
  out.m_sum = out.m_alpha;
  out.c_int = guarded_exp(out.mu * delta, "the inter-impulse growth factor");
  return out;
}

void override_lambda(EnvelopeParams& params, double lambda) {
  params.lambda = lambda;
  if (params.regime == EnvelopeRegime::growth_max_dwell) {
    params.m_alpha =
        guarded_exp((params.mu + lambda) * params.delta, "the inter-impulse growth factor");
    params.m_sum = params.m_alpha;
  }
}

std::vector<std::pair<std::string, double>> envelope_summary(const EnvelopeParams& params) {
  return {{"eps", params.eps},
          {"xi", params.xi},
          {"lambda_min_P", params.lambda_min_P},
          {"lambda_max_P", params.lambda_max_P},
          {"mu", params.mu},
          {"kappa", params.kappa},
          {"rho1", params.rho1},
          {"rho2", params.rho2},
          {"chi1_lin", params.chi1_lin},
          {"chi1_quad", params.chi1_quad},
          {"chi2_quad", params.chi2_quad},
          {"chi3_quad", params.chi3_quad},
          {"alpha2_coeff", params.alpha2_coeff},
          {"alpha3_coeff", params.alpha3_coeff},
          {"r", params.r},
          {"tau", params.tau},
          {"delta", params.delta},
          {"lambda_cap", params.lambda_cap},
          {"lambda", params.lambda},
          {"m_alpha", params.m_alpha},
          {"c_int", params.c_int},
          {"m_sum", params.m_sum}};
}

double eval_chi(const EnvelopeParams& params, double s) {
  const double flow = params.chi1_lin * s + params.chi1_quad * s * s;
  const double other = std::max(params.chi2_quad, params.chi3_quad) * s * s;
  return std::max(flow, other);
}

double eval_v1(const EnvelopeParams& params, const Vec& x) {
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += params.P(i, j) * x[j];
    acc += x[i] * row;
  }
  return acc;
}

double eval_v2(const EnvelopeParams& params, const Trajectory& traj, const InitialFunction& phi,
               double t) {
  if (params.r <= 0.0) return 0.0;
  const double h = traj.h;
  const long long node = nodes_for(t - traj.t0, h);
  const long long window = nodes_for(params.r, h);
  const bool weighted = params.regime != EnvelopeRegime::growth_max_dwell;

  const auto integrand = [&](long long j, Side side) {
    const Vec x = node_sample(traj, phi, j, side);
    double nx2 = 0.0;
    for (double c : x) nx2 += c * c;
    if (!weighted) return nx2;
    const double u = static_cast<double>(j - node) * h;  // in [-r, 0]
    return (2.0 + u / params.r) * nx2;
  };

  double acc = 0.0;
  double right = integrand(node - window, Side::right);
  for (long long j = node - window; j < node; ++j) {
    const double left = right;  // right-side value at the panel start
    right = integrand(j + 1, Side::left);
    acc += 0.5 * h * (left + right);
    right = integrand(j + 1, Side::right);
  }
  return params.eps * acc;
}

EnvelopeTrace eval_envelope(const Trajectory& traj, const InitialFunction& phi,
                            const InputSignal& input, const EnvelopeParams& params) {
  if (traj.times.empty()) throw Error::precondition("envelope: empty trajectory");
  const double t0 = traj.t0;
  const double h = traj.h;
  const std::size_t n_nodes = traj.node_count();

  const double phi0 = vec_norm(traj.states.front());
  const double phi_sup = std::max(phi.sup_norm(), phi0);
  const double alpha = params.alpha2_coeff * phi0 * phi0 + params.alpha3_coeff * phi_sup * phi_sup;

  const auto chi_at = [&](double t, Side side) {
    return eval_chi(params, vec_norm(eval_input(input, t, side)));
  };

  EnvelopeTrace trace;
  trace.times.reserve(n_nodes + traj.impulses.size());
  trace.v.reserve(trace.times.capacity());
  trace.rhs.reserve(trace.times.capacity());

  double chi_integral = 0.0;  // feeds both the amplification and the bound
  double jump_sum = 0.0;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double t = traj.times[i];
    const double dt = t - t0;
    if (std::abs(params.lambda) * dt > kExpGuard) {
      throw Error::numeric("envelope: rate times horizon overflows the envelope weights");
    }
    const double decay = std::exp(-params.lambda * dt);
    const double amp =
        guarded_exp(chi_integral, "the input amplification integral (chi may not be integrable "
                                  "over this horizon)");
    const double v2 = eval_v2(params, traj, phi, t);

    const auto rhs_at = [&](double sum) {
      return amp * (params.m_alpha * alpha * decay + params.c_int * chi_integral +
                    params.m_sum * decay * sum);
    };

    if (const ImpulseRecord* rec = traj.impulse_at(i)) {
      trace.times.push_back(t);
      trace.v.push_back(eval_v1(params, rec->pre_state) + v2);
      trace.rhs.push_back(rhs_at(jump_sum));
      jump_sum += std::exp(params.lambda * dt) * chi_at(t, Side::left);
    }
    trace.times.push_back(t);
    trace.v.push_back(eval_v1(params, traj.states[i]) + v2);
    trace.rhs.push_back(rhs_at(jump_sum));

    if (i + 1 < n_nodes) {
      chi_integral += 0.5 * h * (chi_at(t, Side::right) + chi_at(traj.times[i + 1], Side::left));
    }
  }

  trace.margin.resize(trace.v.size());
  trace.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.v.size(); ++i) {
    trace.margin[i] = trace.rhs[i] - trace.v[i];
    trace.min_margin = std::min(trace.min_margin, trace.margin[i]);
    trace.max_rhs = std::max(trace.max_rhs, trace.rhs[i]);
  }
  trace.tolerance = 1e-6 * (1.0 + trace.max_rhs);
  for (std::size_t i = 0; i < trace.margin.size(); ++i) {
    if (trace.margin[i] < -trace.tolerance) {
      trace.violated = true;
      trace.first_violation_t = trace.times[i];
      break;
    }
  }
  return trace;
}

void write_envelope_csv(std::ostream& out, const EnvelopeTrace& trace) {
  out << "t,lhs,rhs,margin\n";
  char buf[40];
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::string line;
    std::snprintf(buf, sizeof(buf), "%.17g", trace.times[i]);
    line += buf;
    std::snprintf(buf, sizeof(buf), "%.17g", trace.v[i]);
    line += ',';
    line += buf;
    std::snprintf(buf, sizeof(buf), "%.17g", trace.rhs[i]);
    line += ',';
    line += buf;
    std::snprintf(buf, sizeof(buf), "%.17g", trace.margin[i]);
    line += ',';
    line += buf;
    line += '\n';
    out << line;
  }
}

void write_envelope_csv(const std::string& path, const EnvelopeTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error::io("cannot open " + path + " for writing");
  write_envelope_csv(out, trace);
  out.flush();
  if (!out) throw Error::io("failed writing " + path);
}

ConditionCheck check_jump_inequality(const Trajectory& traj, const InitialFunction& phi,
                                     const InputSignal& input, const EnvelopeParams& params) {
  ConditionCheck out;
  const long long window = nodes_for(params.tau, traj.h);
  out.worst = -std::numeric_limits<double>::infinity();
  for (const ImpulseRecord& rec : traj.impulses) {
    const double tk = traj.times[rec.node];
    const double sup =
        window_sup_v1(params, traj, phi, static_cast<long long>(rec.node), window);
    const double w_norm = vec_norm(eval_input(input, tk, Side::left));
    const double lhs = eval_v1(params, rec.post_state);
    const double rhs = params.rho1 * eval_v1(params, rec.pre_state) + params.rho2 * sup +
                       params.chi3_quad * w_norm * w_norm;
    out.worst = std::max(out.worst, lhs - rhs);
    ++out.count;
  }
  if (out.count == 0) out.worst = 0.0;
  out.holds = out.worst <= 1e-9;
  return out;
}

ConditionCheck check_history_bound(const Trajectory& traj, const InitialFunction& phi,
                                   const EnvelopeParams& params) {
  ConditionCheck out;
  const long long window = nodes_for(params.tau, traj.h);
  out.worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.node_count(); ++i) {
    const double v2 = eval_v2(params, traj, phi, traj.times[i]);
    const double sup = window_sup_v1(params, traj, phi, static_cast<long long>(i), window);
    out.worst = std::max(out.worst, v2 - params.kappa * sup);
    ++out.count;
  }
  if (out.count == 0) out.worst = 0.0;
  out.holds = out.worst <= 1e-9;
  return out;
}

}  // namespace iisim
