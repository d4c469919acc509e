// Command-line front end for the simulator and certificate engine. Talks to
// the library exclusively through its public C interface.
//
// Exit codes: 0 success, 1 error, 2 inconclusive certificate, 3 blow-up,
// 4 envelope violation, 5 failed convergence gate.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <iisim/iisim.h>

namespace {

struct RunFlags {
  std::optional<double> h, t0, T, eps, xi;
  std::optional<std::uint64_t> seed;
  bool zero_input = false;
};

// Shared per-run overrides; every subcommand that takes a config gets them.
// The step-size override is spelled --h, so help has to give up -h.
void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->set_help_flag("--help", "print this help and exit");
  cmd->add_option("--h", flags.h, "override the step size");
  cmd->add_option("--t0", flags.t0, "override the start time");
  cmd->add_option("--T", flags.T, "override the end time");
  cmd->add_option("--eps", flags.eps, "override the envelope slack eps");
  cmd->add_option("--xi", flags.xi, "override the jump-split slack xi");
  cmd->add_option("--seed", flags.seed, "reseed a random impulse schedule");
  cmd->add_flag("--zero-input", flags.zero_input, "replace the input with w = 0");
}

int report_error(const char* context) {
  std::fprintf(stderr, "%s: %s\n", context, iisim_last_error());
  return 1;
}

// Loads a config (from file or the built-in set) and applies the overrides.
iisim_config* make_config(const std::string& source, bool builtin, const RunFlags& flags) {
  iisim_config* cfg = nullptr;
  const iisim_status status = builtin ? iisim_config_builtin(source.c_str(), &cfg)
                                      : iisim_config_load(source.c_str(), &cfg);
  if (status != IISIM_OK) {
    report_error(builtin ? "example" : "config");
    return nullptr;
  }
  const auto set = [&](const char* key, const std::optional<double>& v) {
    if (v && iisim_config_set_real(cfg, key, *v) != IISIM_OK) {
      report_error(key);
      iisim_config_free(cfg);
      cfg = nullptr;
    }
    return cfg != nullptr;
  };
  if (!set("h", flags.h) || !set("t0", flags.t0) || !set("T", flags.T) ||
      !set("eps", flags.eps) || !set("xi", flags.xi)) {
    return nullptr;
  }
  if (flags.seed) iisim_config_set_seed(cfg, *flags.seed);
  return cfg;
}

bool write_text(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) {
    std::fprintf(stderr, "cannot write %s\n", path.c_str());
    return false;
  }
  return true;
}

int cmd_certify(const std::string& config_path, const RunFlags& flags) {
  iisim_config* cfg = make_config(config_path, false, flags);
  if (!cfg) return 1;
  iisim_report* rep = nullptr;
  if (iisim_certify(cfg, &rep) != IISIM_OK) {
    iisim_config_free(cfg);
    return report_error("certify");
  }
  char* text = nullptr;
  iisim_report_json(rep, &text);
  std::fputs(text, stdout);
  iisim_string_free(text);
  const int rc = iisim_report_positive(rep) ? 0 : 2;
  iisim_report_free(rep);
  iisim_config_free(cfg);
  return rc;
}

int cmd_simulate(const std::string& config_path, const std::string& out_csv,
                 const RunFlags& flags) {
  iisim_config* cfg = make_config(config_path, false, flags);
  if (!cfg) return 1;
  iisim_sim* sim = nullptr;
  if (iisim_simulate(cfg, flags.zero_input ? 1 : 0, &sim) != IISIM_OK) {
    iisim_config_free(cfg);
    return report_error("simulate");
  }
  int rc = 0;
  if (iisim_sim_write_csv(sim, out_csv.c_str()) != IISIM_OK) {
    rc = report_error("simulate");
  } else {
    char* text = nullptr;
    iisim_sim_summary_json(sim, &text);
    std::fputs(text, stdout);
    iisim_string_free(text);
    rc = iisim_sim_blew_up(sim) ? 3 : 0;
  }
  iisim_sim_free(sim);
  iisim_config_free(cfg);
  return rc;
}

int cmd_trace(const std::string& config_path, const std::string& out_csv,
              const RunFlags& flags, const std::optional<double>& lambda) {
  iisim_config* cfg = make_config(config_path, false, flags);
  if (!cfg) return 1;
  iisim_trace* trace = nullptr;
  const iisim_status status =
      iisim_trace_run(cfg, flags.zero_input ? 1 : 0, lambda ? 1 : 0,
                      lambda.value_or(0.0), &trace);
  if (status != IISIM_OK) {
    iisim_config_free(cfg);
    return report_error("trace");
  }
  int rc = 0;
  if (iisim_trace_write_csv(trace, out_csv.c_str()) != IISIM_OK) {
    rc = report_error("trace");
  } else {
    char* text = nullptr;
    iisim_trace_verdict_json(trace, &text);
    std::fputs(text, stdout);
    iisim_string_free(text);
    rc = iisim_trace_violated(trace) ? 4 : 0;
  }
  iisim_trace_free(trace);
  iisim_config_free(cfg);
  return rc;
}

// Runs certify + simulate + trace for one built-in example, dropping every
// artifact into the output directory.
int cmd_example(const std::string& name, std::string outdir, const RunFlags& flags) {
  if (outdir.empty()) outdir = name;
  iisim_config* cfg = make_config(name, true, flags);
  if (!cfg) return 1;

  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) {
    std::fprintf(stderr, "cannot create %s: %s\n", outdir.c_str(), ec.message().c_str());
    iisim_config_free(cfg);
    return 1;
  }
  const auto path = [&](const char* file) { return outdir + "/" + file; };

  int rc = 0;
  char* text = nullptr;
  if (iisim_config_json(cfg, &text) != IISIM_OK) rc = report_error("example");
  if (rc == 0 && !write_text(path("config.json"), text)) rc = 1;
  iisim_string_free(text);

  iisim_report* rep = nullptr;
  bool positive = false;
  if (rc == 0) {
    if (iisim_certify(cfg, &rep) != IISIM_OK) {
      rc = report_error("certify");
    } else {
      text = nullptr;
      iisim_report_json(rep, &text);
      if (!write_text(path("report.json"), text)) rc = 1;
      iisim_string_free(text);
      positive = iisim_report_positive(rep) != 0;
    }
  }
  iisim_report_free(rep);

  bool blew_up = false;
  if (rc == 0) {
    iisim_sim* sim = nullptr;
    if (iisim_simulate(cfg, flags.zero_input ? 1 : 0, &sim) != IISIM_OK) {
      rc = report_error("simulate");
    } else {
      if (iisim_sim_write_csv(sim, path("traj.csv").c_str()) != IISIM_OK) {
        rc = report_error("simulate");
      } else {
        text = nullptr;
        iisim_sim_summary_json(sim, &text);
        if (!write_text(path("summary.json"), text)) rc = 1;
        iisim_string_free(text);
        blew_up = iisim_sim_blew_up(sim) != 0;
      }
      iisim_sim_free(sim);
    }
  }

  bool violated = false;
  if (rc == 0 && positive) {
    iisim_trace* trace = nullptr;
    if (iisim_trace_run(cfg, flags.zero_input ? 1 : 0, 0, 0.0, &trace) != IISIM_OK) {
      rc = report_error("trace");
    } else {
      if (iisim_trace_write_csv(trace, path("envelope.csv").c_str()) != IISIM_OK) {
        rc = report_error("trace");
      } else {
        text = nullptr;
        iisim_trace_verdict_json(trace, &text);
        if (!write_text(path("verdict.json"), text)) rc = 1;
        iisim_string_free(text);
        violated = iisim_trace_violated(trace) != 0;
      }
      iisim_trace_free(trace);
    }
  }
  iisim_config_free(cfg);

  if (rc != 0) return rc;
  if (!positive) return 2;
  if (blew_up) return 3;
  if (violated) return 4;
  return 0;
}

int cmd_order_check(const std::optional<double>& base_h) {
  char* table = nullptr;
  int pass = 0;
  if (iisim_order_check(base_h.value_or(0.0), nullptr, &table, &pass) != IISIM_OK) {
    return report_error("order-check");
  }
  std::fputs(table, stdout);
  iisim_string_free(table);
  return pass ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator and certificate engine for impulsive delay systems"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  std::string config_path, out_csv, example_name, outdir;
  RunFlags certify_flags, simulate_flags, trace_flags, example_flags;
  std::optional<double> lambda_override, order_h;

  CLI::App* certify = app.add_subcommand("certify", "classify a config's system");
  certify->add_option("config", config_path, "run config (JSON)")->required();
  add_run_flags(certify, certify_flags);

  CLI::App* simulate = app.add_subcommand("simulate", "integrate a configured run");
  simulate->add_option("config", config_path, "run config (JSON)")->required();
  simulate->add_option("--out", out_csv, "trajectory CSV path")->required();
  add_run_flags(simulate, simulate_flags);

  CLI::App* trace = app.add_subcommand("trace", "check a certified run against its envelope");
  trace->add_option("config", config_path, "run config (JSON)")->required();
  trace->add_option("--out", out_csv, "envelope CSV path")->required();
  trace->add_option("--override-lambda", lambda_override,
                    "force the envelope rate (negative control)");
  add_run_flags(trace, trace_flags);

  CLI::App* example = app.add_subcommand("example", "run a built-in benchmark end to end");
  example->add_option("name", example_name, "ex1a, ex1b, ex1c, or ex2")->required();
  example->add_option("--outdir", outdir, "artifact directory (default: the example name)");
  add_run_flags(example, example_flags);

  CLI::App* order = app.add_subcommand("order-check", "run the convergence studies");
  order->set_help_flag("--help", "print this help and exit");
  order->add_option("--h", order_h, "base step of the halving ladder");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // clamp usage errors into the exit-code contract
  }

  if (certify->parsed()) return cmd_certify(config_path, certify_flags);
  if (simulate->parsed()) return cmd_simulate(config_path, out_csv, simulate_flags);
  if (trace->parsed()) return cmd_trace(config_path, out_csv, trace_flags, lambda_override);
  if (example->parsed()) return cmd_example(example_name, outdir, example_flags);
  if (order->parsed()) return cmd_order_check(order_h);
  return 1;
}
