#include "smdp/error.hpp"

namespace smdp {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::null_pointer: return "null pointer";
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::invalid_rates: return "invalid rates";
    case ErrorCode::non_stochastic_row: return "non-stochastic row";
    case ErrorCode::buffer_too_small: return "buffer too small";
    case ErrorCode::out_of_range: return "out of range";
    case ErrorCode::non_positive_rate: return "non-positive rate";
    case ErrorCode::invalid_support: return "invalid support";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::missing_service_entry: return "missing service entry";
    case ErrorCode::no_convergence: return "no convergence";
    case ErrorCode::reducible_chain: return "reducible chain";
    case ErrorCode::schema: return "schema error";
    case ErrorCode::numeric: return "numeric failure";
    case ErrorCode::check_failed: return "structural check failed";
    case ErrorCode::insufficient_buffer: return "insufficient buffer";
    case ErrorCode::invalid_probability: return "invalid probability";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

}  // namespace smdp
