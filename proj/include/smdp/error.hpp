#pragma once

#include <stdexcept>
#include <string>

namespace smdp {

// Values mirror the SMDP_ERROR_* codes of the C API.
enum class ErrorCode : int {
  ok = 0,
  null_pointer = -1,
  invalid_argument = -2,
  invalid_rates = -3,
  non_stochastic_row = -4,
  buffer_too_small = -5,
  out_of_range = -6,
  non_positive_rate = -7,
  invalid_support = -8,
  dimension_mismatch = -9,
  missing_service_entry = -10,
  no_convergence = -11,
  reducible_chain = -12,
  schema = -13,
  numeric = -14,
  check_failed = -15,
  insufficient_buffer = -16,
  invalid_probability = -17,
  internal = -99,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace smdp
