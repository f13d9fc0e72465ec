#include "patchcluster/error.hpp"

namespace patchcluster {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::io_failure: return "io_failure";
    case Errc::bad_magic: return "bad_magic";
    case Errc::unsupported_version: return "unsupported_version";
    case Errc::unsupported_dtype: return "unsupported_dtype";
    case Errc::truncated_payload: return "truncated_payload";
    case Errc::oversized_payload: return "oversized_payload";
    case Errc::dimension_overflow: return "dimension_overflow";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::empty_setting: return "empty_setting";
    case Errc::insufficient_bank_size: return "insufficient_bank_size";
    case Errc::undefined_metric: return "undefined_metric";
    case Errc::missing_input: return "missing_input";
    case Errc::config_conflict: return "config_conflict";
    case Errc::layout_violation: return "layout_violation";
    case Errc::parse_error: return "parse_error";
  }
  return "unknown";
}

}  // namespace patchcluster
