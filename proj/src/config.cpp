#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "errors.hpp"

namespace iisim {

namespace {

using json = nlohmann::ordered_json;

// Every object in the schema lists its allowed keys, so typos fail loudly
// instead of being silently ignored.
void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end()) {
      throw Error::config(where + ": unknown key '" + key + "'");
    }
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error::config(where + ": missing key '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw Error::config(where + ": expected a number");
  return v.get<double>();
}

double need_number(const json& j, const char* key, const std::string& where) {
  return as_number(need(j, key, where), where + "." + key);
}

double opt_number(const json& j, const char* key, double fallback, const std::string& where) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_number(*it, where + "." + key);
}

std::string need_string(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string()) throw Error::config(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::size_t need_index(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<long long>() < 0)) {
    throw Error::config(where + "." + key + ": expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> parse_number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error::config(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// A scalar is a 1x1, a flat array is a single row, nested arrays are
// row-major rows of equal length.
Matrix parse_matrix(const json& v, const std::string& where) {
  if (v.is_number()) return Matrix(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) {
    throw Error::config(where + ": expected a number, a row, or nested rows");
  }
  if (v.front().is_number()) {
    Matrix m(1, v.size());
    for (std::size_t c = 0; c < v.size(); ++c) m(0, c) = as_number(v[c], where);
    return m;
  }
  const std::size_t rows = v.size();
  if (!v.front().is_array() || v.front().empty()) {
    throw Error::config(where + ": rows must be non-empty arrays");
  }
  const std::size_t cols = v.front().size();
  Matrix m(rows, cols);
  for (std::size_t rr = 0; rr < rows; ++rr) {
    const json& row = v[rr];
    if (!row.is_array() || row.size() != cols) {
      throw Error::config(where + ": row " + std::to_string(rr) + " has " +
                          std::to_string(row.size()) + " entries, expected " +
                          std::to_string(cols));
    }
    for (std::size_t cc = 0; cc < cols; ++cc) {
      m(rr, cc) = as_number(row[cc], where + "[" + std::to_string(rr) + "]");
    }
  }
  return m;
}

std::vector<Matrix> parse_matrix_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error::config(where + ": expected an array of matrices");
  std::vector<Matrix> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(parse_matrix(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Vec parse_vec(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>()};
  return parse_number_list(v, where);
}

ChannelSignal parse_channel(const json& v, const std::string& where) {
  if (!v.is_object()) throw Error::config(where + ": expected an object with a 'kind'");
  const std::string kind = need_string(v, "kind", where);
  ChannelSignal ch;
  if (kind == "zero") {
    check_keys(v, {"kind"}, where);
    ch.kind = SignalKind::zero;
  } else if (kind == "constant") {
    check_keys(v, {"kind", "value"}, where);
    ch.kind = SignalKind::constant;
    ch.value = need_number(v, "value", where);
  } else if (kind == "inverse_square") {
    check_keys(v, {"kind", "amplitude", "offset"}, where);
    ch.kind = SignalKind::inverse_square;
    ch.amplitude = need_number(v, "amplitude", where);
    ch.offset = opt_number(v, "offset", 0.0, where);
  } else if (kind == "exp_decay") {
    check_keys(v, {"kind", "amplitude", "rate"}, where);
    ch.kind = SignalKind::exp_decay;
    ch.amplitude = need_number(v, "amplitude", where);
    ch.rate = need_number(v, "rate", where);
  } else if (kind == "piecewise_constant" || kind == "tabulated") {
    check_keys(v, {"kind", "times", "values"}, where);
    ch.kind = kind == "tabulated" ? SignalKind::tabulated : SignalKind::piecewise_constant;
    ch.times = parse_number_list(need(v, "times", where), where + ".times");
    ch.values = parse_number_list(need(v, "values", where), where + ".values");
  } else {
    throw Error::config(where + ": unknown input kind '" + kind + "'");
  }
  ch.validate();
  return ch;
}

InputSignal parse_input(const json& v, std::size_t q, const std::string& where) {
  if (!v.is_object()) throw Error::config(where + ": expected an object with a 'kind'");
  const std::string kind = need_string(v, "kind", where);
  InputSignal sig;
  if (kind == "per_channel") {
    check_keys(v, {"kind", "channels"}, where);
    const json& chans = need(v, "channels", where);
    if (!chans.is_array()) throw Error::config(where + ".channels: expected an array");
    for (std::size_t i = 0; i < chans.size(); ++i) {
      sig.channels.push_back(
          parse_channel(chans[i], where + ".channels[" + std::to_string(i) + "]"));
    }
  } else if (kind == "zero") {
    check_keys(v, {"kind"}, where);
    sig = InputSignal::zero(q);
  } else if (kind == "constant") {
    check_keys(v, {"kind", "values"}, where);
    const Vec values = parse_vec(need(v, "values", where), where + ".values");
    for (double value : values) {
      ChannelSignal ch;
      ch.kind = SignalKind::constant;
      ch.value = value;
      sig.channels.push_back(ch);
    }
  } else {
    // Single-channel kinds double as whole-input descriptions when q = 1.
    if (q != 1) {
      throw Error::config(where + ": kind '" + kind +
                          "' describes one channel; use per_channel for q = " +
                          std::to_string(q));
    }
    sig.channels = {parse_channel(v, where)};
  }
  if (sig.dimension() != q) {
    throw Error::dimension(where + ": got " + std::to_string(sig.dimension()) +
                           " channels, system expects " + std::to_string(q));
  }
  return sig;
}

InitialFunction parse_initial(const json& v, const std::string& where) {
  if (!v.is_object()) throw Error::config(where + ": expected an object with a 'kind'");
  const std::string kind = need_string(v, "kind", where);
  InitialFunction phi;
  if (kind == "constant") {
    check_keys(v, {"kind", "value"}, where);
    phi.kind = InitialFunction::Kind::constant;
    phi.value = parse_vec(need(v, "value", where), where + ".value");
  } else if (kind == "tabulated") {
    check_keys(v, {"kind", "times", "values"}, where);
    phi.kind = InitialFunction::Kind::tabulated;
    phi.times = parse_number_list(need(v, "times", where), where + ".times");
    const json& rows = need(v, "values", where);
    if (!rows.is_array()) throw Error::config(where + ".values: expected an array of states");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      phi.values.push_back(parse_vec(rows[i], where + ".values[" + std::to_string(i) + "]"));
    }
  } else {
    throw Error::config(where + ": unknown initial kind '" + kind + "'");
  }
  return phi;
}

ScheduleClass::Kind parse_class_kind(const std::string& name, const std::string& where) {
  if (name == "inf_dwell") return ScheduleClass::Kind::inf_dwell;
  if (name == "sup_dwell") return ScheduleClass::Kind::sup_dwell;
  if (name == "arbitrary") return ScheduleClass::Kind::arbitrary;
  throw Error::config(where + ": unknown schedule class '" + name + "'");
}

ScheduleSpec parse_schedule(const json& v, const std::string& where) {
  if (!v.is_object()) throw Error::config(where + ": expected an object with a 'kind'");
  const std::string kind = need_string(v, "kind", where);
  ScheduleSpec spec;
  if (kind == "uniform") {
    check_keys(v, {"kind", "delta", "declared_class"}, where);
    spec.kind = ScheduleSpec::Kind::uniform;
    spec.delta = need_number(v, "delta", where);
    if (!(spec.delta > 0.0)) throw Error::config(where + ".delta: must be positive");
  } else if (kind == "random") {
    check_keys(v, {"kind", "delta_min", "delta_max", "seed", "declared_class"}, where);
    spec.kind = ScheduleSpec::Kind::random;
    spec.delta_min = need_number(v, "delta_min", where);
    spec.delta_max = need_number(v, "delta_max", where);
    if (!(spec.delta_min > 0.0) || spec.delta_max < spec.delta_min) {
      throw Error::config(where + ": need 0 < delta_min <= delta_max");
    }
    spec.seed = need_index(v, "seed", where);
  } else if (kind == "explicit") {
    check_keys(v, {"kind", "times", "declared_class"}, where);
    spec.kind = ScheduleSpec::Kind::explicit_times;
    spec.times = parse_number_list(need(v, "times", where), where + ".times");
  } else {
    throw Error::config(where + ": unknown schedule kind '" + kind + "'");
  }
  const auto it = v.find("declared_class");
  if (it != v.end()) {
    const std::string sub = where + ".declared_class";
    if (!it->is_object()) throw Error::config(sub + ": expected an object");
    check_keys(*it, {"kind", "delta"}, sub);
    spec.has_declared_class = true;
    spec.declared_class.kind = parse_class_kind(need_string(*it, "kind", sub), sub);
    spec.declared_class.delta = opt_number(*it, "delta", 0.0, sub);
    if (spec.declared_class.kind != ScheduleClass::Kind::arbitrary &&
        !(spec.declared_class.delta > 0.0)) {
      throw Error::config(sub + ".delta: must be positive for a dwell-bounded class");
    }
  }
  return spec;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t rr = 0; rr < m.rows(); ++rr) {
    json row = json::array();
    for (std::size_t cc = 0; cc < m.cols(); ++cc) row.push_back(m(rr, cc));
    rows.push_back(std::move(row));
  }
  return rows;
}

json channel_json(const ChannelSignal& ch) {
  json out = json::object();
  switch (ch.kind) {
    case SignalKind::zero:
      out["kind"] = "zero";
      break;
    case SignalKind::constant:
      out["kind"] = "constant";
      out["value"] = ch.value;
      break;
    case SignalKind::inverse_square:
      out["kind"] = "inverse_square";
      out["amplitude"] = ch.amplitude;
      out["offset"] = ch.offset;
      break;
    case SignalKind::exp_decay:
      out["kind"] = "exp_decay";
      out["amplitude"] = ch.amplitude;
      out["rate"] = ch.rate;
      break;
    case SignalKind::piecewise_constant:
    case SignalKind::tabulated:
      out["kind"] = ch.kind == SignalKind::tabulated ? "tabulated" : "piecewise_constant";
      out["times"] = ch.times;
      out["values"] = ch.values;
      break;
  }
  return out;
}

const char* class_name(ScheduleClass::Kind kind) {
  switch (kind) {
    case ScheduleClass::Kind::inf_dwell: return "inf_dwell";
    case ScheduleClass::Kind::sup_dwell: return "sup_dwell";
    case ScheduleClass::Kind::arbitrary: return "arbitrary";
  }
  return "arbitrary";
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error::parse(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error::config("config: top level must be an object");
  check_keys(j,
             {"n", "q", "A", "A_list", "B_list", "C", "D", "E", "F", "r", "d", "input",
              "initial", "t0", "T", "h", "schedule", "slacks"},
             "config");

  RunConfig cfg;
  BilinearSystem& sys = cfg.system;
  sys.n = need_index(j, "n", "config");
  sys.q = j.contains("q") ? need_index(j, "q", "config") : 0;
  sys.A = parse_matrix(need(j, "A", "config"), "config.A");
  // Omitted bilinear terms mean zero coupling on every channel.
  const std::vector<Matrix> zero_list(
      sys.q, sys.n > 0 ? Matrix(sys.n, sys.n) : Matrix());
  sys.A_list = j.contains("A_list") ? parse_matrix_list(j["A_list"], "config.A_list")
                                    : zero_list;
  sys.B_list = j.contains("B_list") ? parse_matrix_list(j["B_list"], "config.B_list")
                                    : zero_list;

  const auto opt_matrix = [&](const char* key, Matrix fallback) {
    return j.contains(key) ? parse_matrix(j[key], std::string("config.") + key)
                           : std::move(fallback);
  };
  const Matrix zero_nq = sys.q > 0 && sys.n > 0 ? Matrix(sys.n, sys.q) : Matrix();
  const Matrix zero_nn = sys.n > 0 ? Matrix(sys.n, sys.n) : Matrix();
  sys.C = opt_matrix("C", zero_nq);
  sys.D = opt_matrix("D", zero_nn);
  sys.E = opt_matrix("E", zero_nn);
  sys.F = opt_matrix("F", zero_nq);
  sys.r = opt_number(j, "r", 0.0, "config");
  sys.d = opt_number(j, "d", 0.0, "config");

  cfg.input = j.contains("input") ? parse_input(j["input"], sys.q, "config.input")
                                  : InputSignal::zero(sys.q);
  cfg.initial = parse_initial(need(j, "initial", "config"), "config.initial");
  cfg.t0 = need_number(j, "t0", "config");
  cfg.T = need_number(j, "T", "config");
  cfg.h = need_number(j, "h", "config");
  cfg.schedule = parse_schedule(need(j, "schedule", "config"), "config.schedule");

  if (j.contains("slacks")) {
    const json& s = j["slacks"];
    if (!s.is_object()) throw Error::config("config.slacks: expected an object");
    check_keys(s, {"eps", "xi"}, "config.slacks");
    cfg.slacks.eps = opt_number(s, "eps", 0.01, "config.slacks");
    cfg.slacks.xi = opt_number(s, "xi", 0.01, "config.slacks");
  }

  if (!(cfg.h > 0.0)) throw Error::config("config.h: must be positive");
  if (!(cfg.T >= cfg.t0)) throw Error::config("config.T: must be at least t0");
  if (!(cfg.slacks.eps > 0.0) || !(cfg.slacks.xi > 0.0)) {
    throw Error::config("config.slacks: eps and xi must be positive");
  }
  sys.validate();
  cfg.input.validate();
  cfg.initial.validate(sys.n, sys.max_delay());
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_json(const RunConfig& cfg) {
  const BilinearSystem& sys = cfg.system;
  json j = json::object();
  j["n"] = sys.n;
  j["q"] = sys.q;
  j["A"] = matrix_json(sys.A);
  json a_list = json::array();
  for (const Matrix& m : sys.A_list) a_list.push_back(matrix_json(m));
  j["A_list"] = std::move(a_list);
  json b_list = json::array();
  for (const Matrix& m : sys.B_list) b_list.push_back(matrix_json(m));
  j["B_list"] = std::move(b_list);
  if (!sys.C.empty()) j["C"] = matrix_json(sys.C);
  j["D"] = matrix_json(sys.D);
  j["E"] = matrix_json(sys.E);
  if (!sys.F.empty()) j["F"] = matrix_json(sys.F);
  j["r"] = sys.r;
  j["d"] = sys.d;

  json input = json::object();
  input["kind"] = "per_channel";
  json channels = json::array();
  for (const ChannelSignal& ch : cfg.input.channels) channels.push_back(channel_json(ch));
  input["channels"] = std::move(channels);
  j["input"] = std::move(input);

  json initial = json::object();
  if (cfg.initial.kind == InitialFunction::Kind::constant) {
    initial["kind"] = "constant";
    initial["value"] = cfg.initial.value;
  } else {
    initial["kind"] = "tabulated";
    initial["times"] = cfg.initial.times;
    json rows = json::array();
    for (const Vec& row : cfg.initial.values) rows.push_back(row);
    initial["values"] = std::move(rows);
  }
  j["initial"] = std::move(initial);

  j["t0"] = cfg.t0;
  j["T"] = cfg.T;
  j["h"] = cfg.h;

  json sched = json::object();
  switch (cfg.schedule.kind) {
    case ScheduleSpec::Kind::uniform:
      sched["kind"] = "uniform";
      sched["delta"] = cfg.schedule.delta;
      break;
    case ScheduleSpec::Kind::random:
      sched["kind"] = "random";
      sched["delta_min"] = cfg.schedule.delta_min;
      sched["delta_max"] = cfg.schedule.delta_max;
      sched["seed"] = cfg.schedule.seed;
      break;
    case ScheduleSpec::Kind::explicit_times:
      sched["kind"] = "explicit";
      sched["times"] = cfg.schedule.times;
      break;
  }
  if (cfg.schedule.has_declared_class) {
    json declared = json::object();
    declared["kind"] = class_name(cfg.schedule.declared_class.kind);
    declared["delta"] = cfg.schedule.declared_class.delta;
    sched["declared_class"] = std::move(declared);
  }
  j["schedule"] = std::move(sched);

  json slacks = json::object();
  slacks["eps"] = cfg.slacks.eps;
  slacks["xi"] = cfg.slacks.xi;
  j["slacks"] = std::move(slacks);

  return j.dump(2) + "\n";
}

void save_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error::io("cannot open " + path + " for writing");
  out << config_json(cfg);
  out.flush();
  if (!out) throw Error::io("failed writing " + path);
}

namespace {

ChannelSignal inverse_square_channel(double offset) {
  ChannelSignal ch;
  ch.kind = SignalKind::inverse_square;
  ch.amplitude = 1.0;
  ch.offset = offset;
  return ch;
}

ChannelSignal exp_decay_channel(double rate) {
  ChannelSignal ch;
  ch.kind = SignalKind::exp_decay;
  ch.amplitude = 1.0;
  ch.rate = rate;
  return ch;
}

// Common frame of the scalar benchmark: only the jump map and the schedule
// differ between the three regimes.
RunConfig scalar_benchmark(Matrix D, Matrix E, double delta, double horizon) {
  RunConfig cfg;
  BilinearSystem& s = cfg.system;
  s.n = 1;
  s.q = 2;
  s.A = Matrix::from_rows({{-0.5}});
  s.A_list = {Matrix::from_rows({{0.5}}), Matrix::from_rows({{0.25}})};
  s.B_list = {Matrix::from_rows({{1.0 / 3.0}}), Matrix::from_rows({{0.2}})};
  s.C = Matrix::from_rows({{0.5, 0.5}});
  s.D = std::move(D);
  s.E = std::move(E);
  s.F = Matrix::from_rows({{1.0 / 3.0, 1.0 / 3.0}});
  s.r = 0.4;
  s.d = 0.4;
  // The inverse-square channel is singular at t = 0, so the run starts at 1.
  cfg.input.channels = {inverse_square_channel(0.0), exp_decay_channel(2.0)};
  cfg.initial.kind = InitialFunction::Kind::constant;
  cfg.initial.value = {2.0};
  cfg.t0 = 1.0;
  cfg.T = 1.0 + horizon;
  cfg.h = 1e-3;
  cfg.schedule.kind = ScheduleSpec::Kind::uniform;
  cfg.schedule.delta = delta;
  return cfg;
}

RunConfig planar_benchmark() {
  RunConfig cfg;
  BilinearSystem& s = cfg.system;
  s.n = 2;
  s.q = 2;
  s.A = Matrix::from_rows({{1.5, 1.0}, {0.5, 2.0}});
  s.A_list = {Matrix::from_rows({{0.5, 0.0}, {0.0, 0.5}}),
              Matrix::from_rows({{0.25, 0.0}, {0.0, 0.25}})};
  s.B_list = {Matrix::from_rows({{1.0 / 3.0, 0.0}, {0.0, 1.0 / 3.0}}),
              Matrix::from_rows({{0.2, 0.0}, {0.0, 0.2}})};
  s.C = Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  s.D = Matrix::from_rows({{-0.65, 0.0}, {0.0, -0.65}});
  s.E = Matrix::from_rows({{0.2, 0.0}, {0.0, 0.2}});
  s.F = Matrix::from_rows({{1.0 / 3.0, 1.0 / 3.0}, {1.0 / 3.0, 1.0 / 3.0}});
  s.r = 0.4;
  s.d = 0.4;
  // This run starts at 0, so the inverse-square channel is shifted to -1.
  cfg.input.channels = {inverse_square_channel(-1.0), exp_decay_channel(2.0)};
  cfg.initial.kind = InitialFunction::Kind::constant;
  cfg.initial.value = {0.6, -1.4};
  cfg.t0 = 0.0;
  cfg.T = 6.0;
  cfg.h = 1e-3;
  cfg.schedule.kind = ScheduleSpec::Kind::uniform;
  cfg.schedule.delta = 0.2;
  return cfg;
}

}  // namespace

RunConfig builtin_example(const std::string& name) {
  if (name == "ex1a") {
    return scalar_benchmark(Matrix::from_rows({{0.25}}), Matrix::from_rows({{0.2}}), 1.0, 20.0);
  }
  if (name == "ex1b") {
    return scalar_benchmark(Matrix::from_rows({{-1.0}}), Matrix::from_rows({{0.6}}), 1.0, 20.0);
  }
  if (name == "ex1c") {
    return scalar_benchmark(Matrix::from_rows({{-1.0}}), Matrix::from_rows({{0.8}}), 0.39,
                            10.0);
  }
  if (name == "ex2") return planar_benchmark();
  throw Error::invalid_argument("unknown example '" + name +
                                "' (valid names: ex1a, ex1b, ex1c, ex2)");
}

ImpulseSchedule materialize_schedule(const RunConfig& cfg) {
  const double horizon = cfg.T - cfg.t0;
  ImpulseSchedule sched;
  switch (cfg.schedule.kind) {
    case ScheduleSpec::Kind::uniform:
      sched = make_schedule_uniform(cfg.t0, cfg.schedule.delta, horizon);
      break;
    case ScheduleSpec::Kind::random: {
      // Drawn gaps land between grid nodes; snapping moves each time by at
      // most h/2, which keeps the order as long as gaps cannot shrink to 0.
      if (cfg.schedule.delta_min < cfg.h) {
        throw Error::config(
            "schedule: random gaps need delta_min >= h so impulse times can sit on the "
            "step grid");
      }
      sched = make_schedule_random(cfg.t0, cfg.schedule.delta_min, cfg.schedule.delta_max,
                                   horizon, cfg.schedule.seed);
      for (double& t : sched.times) {
        t = cfg.t0 + static_cast<double>(std::llround((t - cfg.t0) / cfg.h)) * cfg.h;
      }
      const double end_tol = 1e-9 * std::max(1.0, std::abs(cfg.T));
      while (!sched.times.empty() && sched.times.back() > cfg.T + end_tol) {
        sched.times.pop_back();
      }
      break;
    }
    case ScheduleSpec::Kind::explicit_times:
      sched.times = cfg.schedule.times;
      break;
  }
  if (cfg.schedule.has_declared_class) sched.declared = cfg.schedule.declared_class;
  sched.validate(cfg.t0);
  return sched;
}

}  // namespace iisim
