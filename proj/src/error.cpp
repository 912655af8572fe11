#include "hypervae/error.hpp"

namespace hypervae {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::invalid_argument: return "INVALID_ARGUMENT";
    case ErrorCode::domain_error: return "DOMAIN_ERROR";
    case ErrorCode::non_finite: return "NON_FINITE";
    case ErrorCode::parse_error: return "PARSE_ERROR";
    case ErrorCode::missing_column: return "MISSING_COLUMN";
    case ErrorCode::duplicate_id: return "DUPLICATE_ID";
    case ErrorCode::io_error: return "IO_ERROR";
    case ErrorCode::empty_after_qc: return "EMPTY_AFTER_QC";
    case ErrorCode::grid_mismatch: return "GRID_MISMATCH";
    case ErrorCode::missing_split: return "MISSING_SPLIT";
    case ErrorCode::missing_truth: return "MISSING_TRUTH";
    case ErrorCode::id_mismatch: return "ID_MISMATCH";
    case ErrorCode::checksum_mismatch: return "CHECKSUM_MISMATCH";
    case ErrorCode::version_mismatch: return "VERSION_MISMATCH";
    case ErrorCode::untrained_model: return "UNTRAINED_MODEL";
    case ErrorCode::unknown_mission: return "UNKNOWN_MISSION";
    case ErrorCode::degenerate_band: return "DEGENERATE_BAND";
    case ErrorCode::config_error: return "CONFIG_ERROR";
  }
  return "UNKNOWN";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace hypervae
