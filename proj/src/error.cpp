#include "scanreg/error.hpp"

namespace scanreg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parse: return "parse";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_data: return "invalid_data";
    case ErrorCode::degenerate_zone: return "degenerate_zone";
    case ErrorCode::zero_total: return "zero_total";
    case ErrorCode::degenerate_outcome: return "degenerate_outcome";
    case ErrorCode::degenerate_variance: return "degenerate_variance";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::internal_consistency: return "internal_consistency";
    case ErrorCode::empty_result: return "empty_result";
  }
  return "unknown";
}

}  // namespace scanreg
