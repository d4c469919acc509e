#ifndef IISIM_H
#define IISIM_H

/* C interface to the impulsive delay-system simulator and certificate
 * engine. Every object lives behind an opaque handle created and destroyed
 * here; every fallible call returns a status code and leaves a message for
 * iisim_last_error(). Strings returned through char** out-parameters are
 * allocated by the library and released with iisim_string_free(). */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum iisim_status {
  IISIM_OK = 0,
  IISIM_ERR_INVALID_ARGUMENT = 1, /* null handle, unknown key or name */
  IISIM_ERR_IO = 2,               /* file could not be read or written */
  IISIM_ERR_PARSE = 3,            /* malformed JSON */
  IISIM_ERR_DIMENSION = 4,        /* matrix or vector shapes disagree */
  IISIM_ERR_DOMAIN = 5,           /* evaluation outside a function's domain */
  IISIM_ERR_PRECONDITION = 6,     /* data violates an operation's contract */
  IISIM_ERR_NUMERIC = 7,          /* no convergence, singular solve, overflow */
  IISIM_ERR_CONFIG = 8            /* inconsistent run configuration */
} iisim_status;

typedef struct iisim_config iisim_config; /* a run description */
typedef struct iisim_report iisim_report; /* a certificate */
typedef struct iisim_sim iisim_sim;       /* a simulated trajectory */
typedef struct iisim_trace iisim_trace;   /* an envelope evaluation */

/* Message from the calling thread's most recent failure. The pointer stays
 * valid until that thread's next library call; never free it. */
const char* iisim_last_error(void);

void iisim_string_free(char* s);

/* --- run configurations ------------------------------------------------ */

iisim_status iisim_config_load(const char* path, iisim_config** out);
iisim_status iisim_config_parse(const char* json_text, iisim_config** out);

/* One of ex1a, ex1b, ex1c, ex2. */
iisim_status iisim_config_builtin(const char* name, iisim_config** out);

/* Canonical JSON text of the config. */
iisim_status iisim_config_json(const iisim_config* cfg, char** out);

/* Overrides one scalar: "t0", "T", "h", "eps", or "xi". Values are checked
 * when the config is run, not here. */
iisim_status iisim_config_set_real(iisim_config* cfg, const char* key, double value);

/* Reseeds a random impulse schedule (ignored by the other schedule kinds). */
iisim_status iisim_config_set_seed(iisim_config* cfg, uint64_t seed);

void iisim_config_free(iisim_config* cfg);

/* --- certification ------------------------------------------------------ */

iisim_status iisim_certify(const iisim_config* cfg, iisim_report** out);

/* {"verdict", "delta_bound", "intermediates", "notes"} */
iisim_status iisim_report_json(const iisim_report* rep, char** out);

/* 1 when the verdict licenses some schedule class, 0 when inconclusive
 * (or rep is null). */
int iisim_report_positive(const iisim_report* rep);

void iisim_report_free(iisim_report* rep);

/* --- simulation --------------------------------------------------------- */

/* zero_input != 0 replaces the configured input with w = 0. */
iisim_status iisim_simulate(const iisim_config* cfg, int zero_input, iisim_sim** out);

/* Trajectory CSV: t,x1,...,w1,...; impulse nodes emit the left limit first. */
iisim_status iisim_sim_write_csv(const iisim_sim* sim, const char* path);

/* {"max_norm", "final_norm", "blow_up"} */
iisim_status iisim_sim_summary_json(const iisim_sim* sim, char** out);

/* 1 when integration stopped on a diverging state (or sim is null). */
int iisim_sim_blew_up(const iisim_sim* sim);

void iisim_sim_free(iisim_sim* sim);

/* --- envelope trace ------------------------------------------------------ */

/* Certifies, simulates, and evaluates the certified envelope along the run.
 * Fails with IISIM_ERR_PRECONDITION when the certificate is inconclusive or
 * the schedule leaves the certified regime. has_lambda_override != 0 forces
 * the envelope rate to lambda_override (a negative-control probe). */
iisim_status iisim_trace_run(const iisim_config* cfg, int zero_input,
                             int has_lambda_override, double lambda_override,
                             iisim_trace** out);

/* Envelope CSV: t,lhs,rhs,margin. */
iisim_status iisim_trace_write_csv(const iisim_trace* trace, const char* path);

/* {"violated", "first_violation_t", "min_margin", "params_echo"} */
iisim_status iisim_trace_verdict_json(const iisim_trace* trace, char** out);

/* 1 when the envelope inequality failed somewhere (or trace is null). */
int iisim_trace_violated(const iisim_trace* trace);

void iisim_trace_free(iisim_trace* trace);

/* --- integrator order check ---------------------------------------------- */

/* Runs the convergence studies on the halving ladder starting at base_h
 * (base_h <= 0 selects the default 1e-2). Any of json_out, table_out, and
 * pass may be null; *pass is 1 when every study met its gate. */
iisim_status iisim_order_check(double base_h, char** json_out, char** table_out,
                               int* pass);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* IISIM_H */
