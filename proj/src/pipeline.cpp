#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <json.hpp>

#include "errors.hpp"
#include "linalg.hpp"

namespace iisim {

namespace {

using json = nlohmann::ordered_json;

json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

CertificateReport run_certify(const RunConfig& cfg) { return certify(cfg.system); }

std::string certificate_json(const CertificateReport& rep) {
  json j;
  j["verdict"] = verdict_name(rep.verdict);
  const bool bounds_gaps = (rep.verdict == Verdict::min_dwell ||
                            rep.verdict == Verdict::max_dwell) &&
                           !rep.delta_unbounded;
  j["delta_bound"] = bounds_gaps ? json(rep.delta_bound) : json(nullptr);
  json inter = json::object();
  for (const auto& [name, value] : rep.intermediates) inter[name] = number_or_null(value);
  j["intermediates"] = std::move(inter);
  j["notes"] = rep.notes;
  return j.dump(2) + "\n";
}

SimulationResult run_simulate(const RunConfig& cfg, bool zero_input) {
  const ImpulseSchedule schedule = materialize_schedule(cfg);
  const InputSignal input =
      zero_input ? InputSignal::zero(cfg.system.q) : cfg.input;
  SimulationResult out;
  out.trajectory =
      simulate(cfg.system, input, cfg.initial, schedule, cfg.t0, cfg.T, cfg.h);
  for (const Vec& x : out.trajectory.states) {
    out.max_norm = std::max(out.max_norm, vec_norm(x));
  }
  for (const ImpulseRecord& rec : out.trajectory.impulses) {
    out.max_norm = std::max(out.max_norm, vec_norm(rec.pre_state));
  }
  if (!out.trajectory.states.empty()) {
    out.final_norm = vec_norm(out.trajectory.states.back());
  }
  return out;
}

std::string summary_json(const SimulationResult& sim) {
  json j;
  j["max_norm"] = sim.max_norm;
  j["final_norm"] = sim.final_norm;
  j["blow_up"] = sim.trajectory.blew_up;
  return j.dump(2) + "\n";
}

TraceResult run_trace(const RunConfig& cfg, bool zero_input,
                      std::optional<double> lambda_override) {
  TraceResult res;
  res.certificate = certify(cfg.system);
  if (res.certificate.verdict == Verdict::inconclusive) {
    throw Error::precondition(
        "trace needs a positive certificate, but certification was inconclusive");
  }

  const ImpulseSchedule schedule = materialize_schedule(cfg);
  const GapStats gaps = classify_schedule(schedule, cfg.t0);
  const double eps = cfg.slacks.eps;
  const double xi = cfg.slacks.xi;

  switch (res.certificate.verdict) {
    case Verdict::min_dwell:
      // The envelope must survive the smallest gap actually scheduled; the
      // construction throws when that gap is inside the certified minimum.
      res.params = build_decay_envelope(cfg.system, eps, xi, true, gaps.inf_gap);
      break;
    case Verdict::all_schedules:
      res.params = build_decay_envelope(cfg.system, eps, xi, false, 0.0);
      break;
    case Verdict::max_dwell: {
      // The tail after the last impulse grows unchecked, so it counts as a
      // gap alongside the scheduled ones.
      const double last = schedule.times.empty() ? cfg.t0 : schedule.times.back();
      const double widest = std::max(gaps.sup_gap, cfg.T - last);
      if (!res.certificate.delta_unbounded && widest >= res.certificate.delta_bound) {
        throw Error::precondition(
            "schedule gap " + std::to_string(widest) +
            " reaches the certified maximum dwell time " +
            std::to_string(res.certificate.delta_bound) +
            "; tighten the schedule or shorten the tail after the last impulse");
      }
      res.params = build_growth_envelope(cfg.system, eps, xi, widest);
      break;
    }
    case Verdict::inconclusive:
      break;  // unreachable; handled above
  }
  if (lambda_override) override_lambda(res.params, *lambda_override);

  const InputSignal input =
      zero_input ? InputSignal::zero(cfg.system.q) : cfg.input;
  const Trajectory traj =
      simulate(cfg.system, input, cfg.initial, schedule, cfg.t0, cfg.T, cfg.h);

  res.trace = eval_envelope(traj, cfg.initial, input, res.params);
  res.jump_check = check_jump_inequality(traj, cfg.initial, input, res.params);
  res.history_check = check_history_bound(traj, cfg.initial, res.params);
  return res;
}

std::string verdict_json(const TraceResult& res) {
  json j;
  j["violated"] = res.trace.violated;
  j["first_violation_t"] =
      res.trace.violated ? json(res.trace.first_violation_t) : json(nullptr);
  j["min_margin"] = res.trace.min_margin;
  json echo = json::object();
  for (const auto& [name, value] : envelope_summary(res.params)) {
    echo[name] = number_or_null(value);
  }
  j["params_echo"] = std::move(echo);
  return j.dump(2) + "\n";
}

}  // namespace iisim
