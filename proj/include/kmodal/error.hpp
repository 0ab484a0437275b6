#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kmodal {

enum class ErrorCode
{
  empty_input,
  non_finite_value,
  length_mismatch,
  no_interior_points,
  too_few_points,
  degenerate_sample,
  infeasible_k,
  empty_modal_interval,
  overlap_violation,
  too_few_points_for_folds,
  invalid_argument,
  parse_error
};

std::string_view to_string(ErrorCode code);

//! Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what)
    , code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace kmodal
