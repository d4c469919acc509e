#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace iisim {

// Coarse failure categories. They map one-to-one onto the status codes of the
// public C interface, so every throw site picks the category a caller could
// reasonably branch on.
enum class ErrorCode {
  invalid_argument,  // null handle, unknown key, bad enum value
  io,                // file could not be read or written
  parse,             // malformed JSON / CSV
  dimension,         // matrix or vector shapes disagree
  domain,            // evaluation outside a function's domain
  precondition,      // operation called on data that violates its contract
  numeric,           // iteration failed to converge, singular solve, overflow
  config,            // run configuration is inconsistent (step size, schedule, ...)
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  static Error invalid_argument(std::string m) { return {ErrorCode::invalid_argument, std::move(m)}; }
  static Error io(std::string m) { return {ErrorCode::io, std::move(m)}; }
  static Error parse(std::string m) { return {ErrorCode::parse, std::move(m)}; }
  static Error dimension(std::string m) { return {ErrorCode::dimension, std::move(m)}; }
  static Error domain(std::string m) { return {ErrorCode::domain, std::move(m)}; }
  static Error precondition(std::string m) { return {ErrorCode::precondition, std::move(m)}; }
  static Error numeric(std::string m) { return {ErrorCode::numeric, std::move(m)}; }
  static Error config(std::string m) { return {ErrorCode::config, std::move(m)}; }

private:
  ErrorCode code_;
};

}  // namespace iisim
