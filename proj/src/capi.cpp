#include "iisim/iisim.h"

#include <cstring>
#include <exception>
#include <optional>
#include <string>
#include <utility>

#include "config.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "order_check.hpp"
#include "pipeline.hpp"

using namespace iisim;

// Handle types are thin wrappers; all behavior lives in the C++ core.
struct iisim_config {
  RunConfig cfg;
};
struct iisim_report {
  CertificateReport rep;
};
struct iisim_sim {
  SimulationResult sim;
  InputSignal input_used;  // the CSV writer echoes the driving input
};
struct iisim_trace {
  TraceResult res;
};

namespace {

thread_local std::string t_last_error;

iisim_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return IISIM_ERR_INVALID_ARGUMENT;
    case ErrorCode::io: return IISIM_ERR_IO;
    case ErrorCode::parse: return IISIM_ERR_PARSE;
    case ErrorCode::dimension: return IISIM_ERR_DIMENSION;
    case ErrorCode::domain: return IISIM_ERR_DOMAIN;
    case ErrorCode::precondition: return IISIM_ERR_PRECONDITION;
    case ErrorCode::numeric: return IISIM_ERR_NUMERIC;
    case ErrorCode::config: return IISIM_ERR_CONFIG;
  }
  return IISIM_ERR_INVALID_ARGUMENT;
}

iisim_status fail(iisim_status status, const char* msg) {
  t_last_error = msg;
  return status;
}

// Runs the body, translating exceptions into status codes + last_error.
template <typename F>
iisim_status guarded(F&& body) {
  try {
    body();
    t_last_error.clear();
    return IISIM_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return IISIM_ERR_NUMERIC;
  }
}

void set_string(const std::string& s, char** out) {
  *out = new char[s.size() + 1];
  std::memcpy(*out, s.c_str(), s.size() + 1);
}

}  // namespace

extern "C" {

const char* iisim_last_error(void) { return t_last_error.c_str(); }

void iisim_string_free(char* s) { delete[] s; }

iisim_status iisim_config_load(const char* path, iisim_config** out) {
  if (!path || !out) return fail(IISIM_ERR_INVALID_ARGUMENT, "config_load: null argument");
  return guarded([&] { *out = new iisim_config{load_config(path)}; });
}

iisim_status iisim_config_parse(const char* json_text, iisim_config** out) {
  if (!json_text || !out)
    return fail(IISIM_ERR_INVALID_ARGUMENT, "config_parse: null argument");
  return guarded([&] { *out = new iisim_config{parse_config(json_text)}; });
}

iisim_status iisim_config_builtin(const char* name, iisim_config** out) {
  if (!name || !out) return fail(IISIM_ERR_INVALID_ARGUMENT, "config_builtin: null argument");
  return guarded([&] { *out = new iisim_config{builtin_example(name)}; });
}

iisim_status iisim_config_json(const iisim_config* cfg, char** out) {
  if (!cfg || !out) return fail(IISIM_ERR_INVALID_ARGUMENT, "config_json: null argument");
  return guarded([&] { set_string(config_json(cfg->cfg), out); });
}

iisim_status iisim_config_set_real(iisim_config* cfg, const char* key, double value) {
  if (!cfg || !key) return fail(IISIM_ERR_INVALID_ARGUMENT, "config_set_real: null argument");
  return guarded([&] {
    const std::string k = key;
    if (k == "t0") cfg->cfg.t0 = value;
    else if (k == "T") cfg->cfg.T = value;
    else if (k == "h") cfg->cfg.h = value;
    else if (k == "eps") cfg->cfg.slacks.eps = value;
    else if (k == "xi") cfg->cfg.slacks.xi = value;
    else throw Error::invalid_argument("config_set_real: unknown key '" + k +
                                       "' (valid: t0, T, h, eps, xi)");
  });
}

iisim_status iisim_config_set_seed(iisim_config* cfg, uint64_t seed) {
  if (!cfg) return fail(IISIM_ERR_INVALID_ARGUMENT, "config_set_seed: null argument");
  cfg->cfg.schedule.seed = seed;
  return IISIM_OK;
}

void iisim_config_free(iisim_config* cfg) { delete cfg; }

iisim_status iisim_certify(const iisim_config* cfg, iisim_report** out) {
  if (!cfg || !out) return fail(IISIM_ERR_INVALID_ARGUMENT, "certify: null argument");
  return guarded([&] { *out = new iisim_report{run_certify(cfg->cfg)}; });
}

iisim_status iisim_report_json(const iisim_report* rep, char** out) {
  if (!rep || !out) return fail(IISIM_ERR_INVALID_ARGUMENT, "report_json: null argument");
  return guarded([&] { set_string(certificate_json(rep->rep), out); });
}

int iisim_report_positive(const iisim_report* rep) {
  return rep && rep->rep.verdict != Verdict::inconclusive ? 1 : 0;
}

void iisim_report_free(iisim_report* rep) { delete rep; }

iisim_status iisim_simulate(const iisim_config* cfg, int zero_input, iisim_sim** out) {
  if (!cfg || !out) return fail(IISIM_ERR_INVALID_ARGUMENT, "simulate: null argument");
  return guarded([&] {
    auto* sim = new iisim_sim;
    try {
      sim->sim = run_simulate(cfg->cfg, zero_input != 0);
      sim->input_used =
          zero_input ? InputSignal::zero(cfg->cfg.system.q) : cfg->cfg.input;
    } catch (...) {
      delete sim;
      throw;
    }
    *out = sim;
  });
}

iisim_status iisim_sim_write_csv(const iisim_sim* sim, const char* path) {
  if (!sim || !path) return fail(IISIM_ERR_INVALID_ARGUMENT, "sim_write_csv: null argument");
  return guarded([&] { write_trajectory_csv(path, sim->sim.trajectory, sim->input_used); });
}

iisim_status iisim_sim_summary_json(const iisim_sim* sim, char** out) {
  if (!sim || !out) return fail(IISIM_ERR_INVALID_ARGUMENT, "sim_summary_json: null argument");
  return guarded([&] { set_string(summary_json(sim->sim), out); });
}

int iisim_sim_blew_up(const iisim_sim* sim) {
  return sim && sim->sim.trajectory.blew_up ? 1 : 0;
}

void iisim_sim_free(iisim_sim* sim) { delete sim; }

iisim_status iisim_trace_run(const iisim_config* cfg, int zero_input,
                             int has_lambda_override, double lambda_override,
                             iisim_trace** out) {
  if (!cfg || !out) return fail(IISIM_ERR_INVALID_ARGUMENT, "trace_run: null argument");
  return guarded([&] {
    const std::optional<double> lambda =
        has_lambda_override ? std::optional<double>(lambda_override) : std::nullopt;
    *out = new iisim_trace{run_trace(cfg->cfg, zero_input != 0, lambda)};
  });
}

iisim_status iisim_trace_write_csv(const iisim_trace* trace, const char* path) {
  if (!trace || !path)
    return fail(IISIM_ERR_INVALID_ARGUMENT, "trace_write_csv: null argument");
  return guarded([&] { write_envelope_csv(path, trace->res.trace); });
}

iisim_status iisim_trace_verdict_json(const iisim_trace* trace, char** out) {
  if (!trace || !out)
    return fail(IISIM_ERR_INVALID_ARGUMENT, "trace_verdict_json: null argument");
  return guarded([&] { set_string(verdict_json(trace->res), out); });
}

int iisim_trace_violated(const iisim_trace* trace) {
  return trace && trace->res.trace.violated ? 1 : 0;
}

void iisim_trace_free(iisim_trace* trace) { delete trace; }

iisim_status iisim_order_check(double base_h, char** json_out, char** table_out, int* pass) {
  return guarded([&] {
    const OrderCheckResult result = run_order_check(base_h > 0.0 ? base_h : 1e-2);
    if (json_out) set_string(order_check_json(result), json_out);
    if (table_out) set_string(order_check_table(result), table_out);
    if (pass) *pass = result.pass ? 1 : 0;
  });
}

}  // extern "C"
