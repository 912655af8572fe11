#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypervae {

enum class ErrorCode {
  dimension_mismatch,
  invalid_argument,
  domain_error,
  non_finite,
  parse_error,
  missing_column,
  duplicate_id,
  io_error,
  empty_after_qc,
  grid_mismatch,
  missing_split,
  missing_truth,
  id_mismatch,
  checksum_mismatch,
  version_mismatch,
  untrained_model,
  unknown_mission,
  degenerate_band,
  config_error,
};

/// Stable upper-case token for an error code, e.g. "GRID_MISMATCH".
std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the toolkit carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace hypervae
