#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "matrix.hpp"
#include "system.hpp"

namespace iisim {

// What the certificate licenses: a minimum dwell time between impulses, a
// maximum dwell time, any impulse schedule, or nothing.
enum class Verdict { min_dwell, max_dwell, all_schedules, inconclusive };

const char* verdict_name(Verdict v);

struct CertificateReport {
  Verdict verdict = Verdict::inconclusive;
  // min_dwell: gaps must exceed delta_bound; max_dwell: gaps must stay below.
  double delta_bound = 0.0;
  // max_dwell with a full state reset: any finite gap bound works.
  bool delta_unbounded = false;
  // Named quantities in derivation order, for reports and tests.
  std::vector<std::pair<std::string, double>> intermediates;
  std::vector<std::string> notes;

  double intermediate(const std::string& key) const;
  bool has_note(const std::string& tag) const;
};

// Certificate for a Hurwitz drift matrix: solves A'P + PA = -I and compares
// the jump growth of x'Px against the flow decay. Classifies into
// all_schedules / min_dwell / inconclusive with a 1e-12 dead band around the
// break-even jump gain.
CertificateReport certify_hurwitz(const BilinearSystem& sys);

// Certificate for an unstable drift matrix: jumps must contract faster than
// the flow grows, which caps the time between impulses.
CertificateReport certify_unstable(const BilinearSystem& sys);

// Dispatches on whether A is Hurwitz.
CertificateReport certify(const BilinearSystem& sys);

// Scalar dwell-time conditions on the comparison system: decay/growth rate
// mu between jumps, jump gains rho1 (current state) and rho2 (delayed
// state), history-functional gain kappa, history window r, dwell time delta.
struct DwellParams {
  double mu = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  std::optional<double> kappa;
  double r = 0.0;
  double delta = 0.0;
};

struct DwellCheck {
  bool holds = false;
  double rho = 0.0;  // composite jump multiplier the condition tests
  std::optional<double> delta_bound;
  std::vector<std::string> notes;
};

// Stable flow, jumps may expand: gaps of at least delta keep the decay
// ahead of the jumps. Branches on rho1 >= 1; the rho1 < 1 branch needs
// kappa and rho1 + rho2 >= 1.
DwellCheck check_min_dwell(const DwellParams& p);

// Unstable flow, contracting jumps: gaps of at most delta keep the jumps
// ahead of the growth. Needs kappa and rho1 < 1.
DwellCheck check_max_dwell(const DwellParams& p);

// Conditions under which every impulse schedule is admissible. mu > 0 pairs
// with rho1 + rho2 < 1 (or exactly neutral jumps); mu = 0 needs kappa and a
// strictly contractive composite gain.
DwellCheck check_arbitrary_dwell(const DwellParams& p);

}  // namespace iisim
