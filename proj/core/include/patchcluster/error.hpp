#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace patchcluster {

/// Machine-readable error categories. The CLI reports these by name.
enum class Errc {
  io_failure,
  bad_magic,
  unsupported_version,
  unsupported_dtype,
  truncated_payload,
  oversized_payload,
  dimension_overflow,
  invalid_argument,
  shape_mismatch,
  empty_setting,
  insufficient_bank_size,
  undefined_metric,
  missing_input,
  config_conflict,
  layout_violation,
  parse_error,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace patchcluster
