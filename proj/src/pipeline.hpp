#pragma once

#include <optional>
#include <string>

#include "certificates.hpp"
#include "config.hpp"
#include "envelope.hpp"
#include "integrator.hpp"

namespace iisim {

// The three run modes behind the command line and the C API: certify a
// config's system, simulate a config's run, and trace a certified run
// against its envelope. Each returns data; callers decide what to print
// or write where.

CertificateReport run_certify(const RunConfig& cfg);

// {"verdict": ..., "delta_bound": number-or-null, "intermediates": {...},
//  "notes": [...]}; delta_bound is null unless the verdict bounds gaps.
std::string certificate_json(const CertificateReport& rep);

struct SimulationResult {
  Trajectory trajectory;
  double max_norm = 0.0;    // over all nodes, left limits included
  double final_norm = 0.0;  // at the last computed node
};

// Materializes the schedule and integrates. zero_input replaces the
// configured input with w = 0 (the free-decay control run).
SimulationResult run_simulate(const RunConfig& cfg, bool zero_input = false);

// {"max_norm": ..., "final_norm": ..., "blow_up": ...}
std::string summary_json(const SimulationResult& sim);

struct TraceResult {
  CertificateReport certificate;
  EnvelopeParams params;
  EnvelopeTrace trace;
  ConditionCheck jump_check;     // jump inequality at every impulse
  ConditionCheck history_check;  // window functional vs its history bound
};

// Certifies, simulates, then instantiates and evaluates the envelope the
// certificate licenses for the materialized schedule: minimum-dwell
// verdicts use the smallest actual gap, maximum-dwell verdicts the largest
// gap including the tail after the final impulse (which must stay below
// the certified cap). Throws when the certificate is inconclusive or the
// schedule leaves the certified regime. lambda_override replaces the
// selected rate, for probing rates beyond the cap.
TraceResult run_trace(const RunConfig& cfg, bool zero_input = false,
                      std::optional<double> lambda_override = std::nullopt);

// {"violated": ..., "first_violation_t": number-or-null, "min_margin": ...,
//  "params_echo": {...}}
std::string verdict_json(const TraceResult& res);

}  // namespace iisim
