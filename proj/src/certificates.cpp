#include "certificates.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"

namespace iisim {

namespace {

// Break-even jump gains this close to 1 are classified conservatively.
constexpr double kDeadBand = 1e-12;

Matrix plus_identity(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += 1.0;
  return out;
}

void require_jump_params(const DwellParams& p, bool needs_delta) {
  if (!(p.rho1 >= 0.0) || !(p.rho2 >= 0.0) || !(p.r >= 0.0)) {
    throw Error::invalid_argument("dwell check: rho1, rho2, r must be nonnegative");
  }
  if (p.kappa && !(*p.kappa >= 0.0)) {
    throw Error::invalid_argument("dwell check: kappa must be nonnegative");
  }
  if (needs_delta && !(p.delta > 0.0)) {
    throw Error::invalid_argument("dwell check: delta must be positive");
  }
}

}  // namespace

// Serialized names follow the schedule classes the verdicts certify.
const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::min_dwell: return "inf_dwell";
    case Verdict::max_dwell: return "sup_dwell";
    case Verdict::all_schedules: return "all";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double CertificateReport::intermediate(const std::string& key) const {
  for (const auto& [name, value] : intermediates) {
    if (name == key) return value;
  }
  throw Error::invalid_argument("certificate: no intermediate named " + key);
}

bool CertificateReport::has_note(const std::string& tag) const {
  for (const std::string& note : notes) {
    if (note.find(tag) != std::string::npos) return true;
  }
  return false;
}

CertificateReport certify_hurwitz(const BilinearSystem& sys) {
  sys.validate();
  CertificateReport rep;
  if (!is_hurwitz(sys.A)) {
    rep.notes.push_back("drift matrix is not Hurwitz; use the unstable-flow certificate");
    return rep;
  }

  const Matrix p = solve_lyapunov(sys.A);
  const SymEig pe = eig_sym(p);

  const Matrix id = plus_identity(sys.D);
  const double a = eig_sym(id.transposed() * p * id).lambda_max / pe.lambda_min;
  const double b = eig_sym(sys.E.transposed() * p * sys.E).lambda_max / pe.lambda_min;
  const double mu0 =
      sys.r > 0.0 ? std::min(1.0 / pe.lambda_max, 1.0 / (2.0 * sys.r)) : 1.0 / pe.lambda_max;
  const double root = std::sqrt(a) + std::sqrt(b);
  const double tau = sys.max_delay();

  rep.intermediates = {{"lambda_min_P", pe.lambda_min},
                       {"lambda_max_P", pe.lambda_max},
                       {"a", a},
                       {"b", b},
                       {"sqrt_a_plus_sqrt_b", root},
                       {"mu0", mu0}};

  const auto min_dwell = [&] {
    rep.verdict = Verdict::min_dwell;
    rep.delta_bound = 2.0 * std::log(std::sqrt(a) + std::sqrt(b * std::exp(mu0 * tau))) / mu0;
    rep.intermediates.emplace_back("delta_min", rep.delta_bound);
  };

  if (root < 1.0 - kDeadBand) {
    rep.verdict = Verdict::all_schedules;
  } else if (root > 1.0 + kDeadBand) {
    min_dwell();
  } else if (b == 0.0 && std::abs(a - 1.0) <= kDeadBand) {
    // Neutral jumps: x'Px is preserved exactly, so no dwell constraint.
    rep.verdict = Verdict::all_schedules;
    rep.notes.push_back("jump gain sits on the break-even boundary (neutral jumps)");
  } else if (b > 0.0) {
    // Break-even with a genuine delayed term: the dwell bound stays positive.
    min_dwell();
    rep.notes.push_back("jump gain sits on the break-even boundary; minimum dwell still applies");
  } else {
    rep.notes.push_back(
        "jump gain is numerically indistinguishable from break-even; classification withheld");
  }
  return rep;
}

CertificateReport certify_unstable(const BilinearSystem& sys) {
  sys.validate();
  CertificateReport rep;

  const double norm_id = spectral_norm(plus_identity(sys.D));
  const double norm_e = spectral_norm(sys.E);
  const double s = norm_id + norm_e;
  const double m = eig_sym(sys.A + sys.A.transposed()).lambda_max;

  rep.intermediates = {{"norm_I_plus_D", norm_id},
                       {"norm_E", norm_e},
                       {"jump_norm_sum", s},
                       {"lambda_max_A_sym", m}};

  if (m <= 0.0) {
    rep.notes.push_back("flow is dissipative in the Euclidean norm; use the Hurwitz certificate");
    return rep;
  }
  if (s >= 1.0 - kDeadBand) {
    rep.notes.push_back("jump_not_contractive: |I+D| + |E| >= 1, so no dwell cap can help");
    return rep;
  }
  rep.verdict = Verdict::max_dwell;
  if (s == 0.0) {
    // Every jump resets the state completely; any finite dwell cap works.
    rep.delta_unbounded = true;
    rep.notes.push_back("jumps reset the state to zero; any bounded dwell time is admissible");
    return rep;
  }
  rep.delta_bound = -2.0 * std::log(s) / m;
  rep.intermediates.emplace_back("delta_max", rep.delta_bound);
  return rep;
}

CertificateReport certify(const BilinearSystem& sys) {
  sys.validate();
  return is_hurwitz(sys.A) ? certify_hurwitz(sys) : certify_unstable(sys);
}

DwellCheck check_min_dwell(const DwellParams& p) {
  require_jump_params(p, true);
  if (!(p.mu > 0.0)) {
    throw Error::invalid_argument("min dwell: mu must be a positive decay rate");
  }
  DwellCheck out;
  if (p.rho1 >= 1.0) {
    out.rho = p.rho1 + p.rho2 * std::exp(p.mu * p.r);
  } else {
    if (!p.kappa) {
      throw Error::precondition("min dwell: kappa is required when rho1 < 1");
    }
    if (p.rho1 + p.rho2 < 1.0) {
      out.rho = p.rho1 + p.rho2;
      out.notes.push_back("rho1 + rho2 < 1: use the arbitrary-dwell condition instead");
      return out;
    }
    out.rho = p.rho1 + (p.rho2 + (1.0 - p.rho1) * *p.kappa) * std::exp(p.mu * p.r);
  }
  if (out.rho <= 1.0) {
    out.notes.push_back("jumps do not expand; every schedule with positive gaps qualifies");
    out.delta_bound = 0.0;
    out.holds = true;
    return out;
  }
  out.delta_bound = std::log(out.rho) / p.mu;
  out.holds = std::log(out.rho) < p.mu * p.delta;
  return out;
}

DwellCheck check_max_dwell(const DwellParams& p) {
  require_jump_params(p, true);
  if (!(p.mu > 0.0)) {
    throw Error::invalid_argument("max dwell: mu must be a positive growth rate");
  }
  if (!p.kappa) {
    throw Error::precondition("max dwell: kappa is required");
  }
  DwellCheck out;
  if (p.rho1 >= 1.0) {
    out.rho = p.rho1;
    out.notes.push_back("rho1 must contract (rho1 < 1) for a dwell cap to exist");
    return out;
  }
  out.rho = p.rho1 + p.rho2 + (1.0 - p.rho1) * *p.kappa;
  if (out.rho >= 1.0) {
    out.notes.push_back("composite jump multiplier is not contractive; no dwell cap exists");
    return out;
  }
  out.delta_bound = -std::log(out.rho) / p.mu;
  out.holds = std::log(out.rho) < -p.mu * p.delta;
  return out;
}

DwellCheck check_arbitrary_dwell(const DwellParams& p) {
  require_jump_params(p, false);
  if (!(p.mu >= 0.0)) {
    throw Error::invalid_argument("arbitrary dwell: mu must be nonnegative");
  }
  if (p.rho1 > 1.0) {
    throw Error::invalid_argument("arbitrary dwell: rho1 must not exceed 1");
  }
  DwellCheck out;
  if (p.mu > 0.0) {
    out.rho = p.rho1 + p.rho2;
    out.holds =
        out.rho < 1.0 || (std::abs(p.rho1 - 1.0) <= kDeadBand && p.rho2 <= kDeadBand);
    if (!out.holds) {
      out.notes.push_back("jump gains exceed 1; a dwell-time restriction is needed");
    }
    return out;
  }
  if (!p.kappa) {
    throw Error::precondition("arbitrary dwell: kappa is required when mu = 0");
  }
  out.rho = p.rho1 + p.rho2 + (1.0 - p.rho1) * *p.kappa;
  out.holds = out.rho < 1.0;
  if (!out.holds) {
    out.notes.push_back("composite jump multiplier is not contractive");
  }
  return out;
}

}  // namespace iisim
