#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scanreg {

enum class ErrorCode {
  parse,                 // malformed input file or cell
  invalid_argument,      // precondition on arguments violated
  invalid_data,          // table violates an invariant required by the model
  degenerate_zone,       // zone empty, or covers every region where an outside part is needed
  zero_total,            // no events at all
  degenerate_outcome,    // Bernoulli outcome constant over all regions
  degenerate_variance,   // fitted residual variance at the numeric floor
  rank_deficient,        // design matrix without full column rank
  non_convergence,       // iterative fit hit its iteration cap
  internal_consistency,  // a numerical invariant failed beyond its guard
  empty_result,          // no zone could be evaluated
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library. The code lets callers (the scan
/// loop, the CLI) decide between flagging, skipping and aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scanreg
