#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "system.hpp"

namespace iisim {

// How the impulse times of a run are specified: evenly spaced, drawn from a
// seeded generator, or written out explicitly.
struct ScheduleSpec {
  enum class Kind { uniform, random, explicit_times };
  Kind kind = Kind::uniform;
  double delta = 0.0;                // uniform
  double delta_min = 0.0;            // random
  double delta_max = 0.0;            // random
  std::uint64_t seed = 0;            // random
  std::vector<double> times;         // explicit
  bool has_declared_class = false;   // optional declared dwell class
  ScheduleClass declared_class;
};

struct Slacks {
  double eps = 0.01;
  double xi = 0.01;
};

// Everything a run needs, as read from a JSON config: the system matrices,
// the input and initial data, the time grid, the impulse schedule, and the
// slack parameters the envelope construction uses.
struct RunConfig {
  BilinearSystem system;
  InputSignal input;
  InitialFunction initial;
  double t0 = 0.0;
  double T = 0.0;
  double h = 0.0;
  ScheduleSpec schedule;
  Slacks slacks;
};

// Parses and validates a config from JSON text. Unknown keys anywhere are
// rejected (so typos fail loudly); matrices accept a scalar for 1x1, a flat
// array for a single row, or nested row-major arrays. Malformed JSON throws
// a parse error carrying the line/column; inconsistent contents throw
// config or dimension errors naming the field.
RunConfig parse_config(const std::string& text);

// Reads a config file; io error when unreadable.
RunConfig load_config(const std::string& path);

// Serializes a config to canonical JSON text (stable key order, nested
// arrays for all matrices, inputs in per-channel form). Parsing the result
// reproduces the config; serializing again reproduces the text.
std::string config_json(const RunConfig& cfg);

void save_config(const std::string& path, const RunConfig& cfg);

// The four built-in benchmark runs: scalar system with expanding jumps and
// unit gaps (ex1a), with resetting jumps and unit gaps (ex1b), with
// resetting jumps and fast gaps (ex1c), and the planar unstable system held
// down by contracting jumps (ex2). Unknown names throw, listing the valid
// ones.
RunConfig builtin_example(const std::string& name);

// Turns the schedule spec into concrete impulse times over [t0, T]. Random
// gaps are drawn first and then snapped to the step grid (requiring
// delta_min >= h); uniform and explicit times are passed through unchanged
// and validated, so off-grid times surface at grid validation.
ImpulseSchedule materialize_schedule(const RunConfig& cfg);

}  // namespace iisim
