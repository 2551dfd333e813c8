#include "dpmf/error.hpp"

namespace dpmf {

const char* category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Domain: return "domain_error";
    case ErrorCategory::PositiveDefiniteness: return "not_positive_definite";
    case ErrorCategory::Parse: return "parse_error";
    case ErrorCategory::Validation: return "validation_error";
    case ErrorCategory::Index: return "index_error";
    case ErrorCategory::Sampler: return "sampler_error";
    case ErrorCategory::InvalidState: return "invalid_state";
    case ErrorCategory::Config: return "config_error";
    case ErrorCategory::Io: return "io_error";
  }
  return "error";
}

int exit_status(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Io: return 3;
    case ErrorCategory::Parse: return 4;
    case ErrorCategory::Validation: return 5;
    case ErrorCategory::Domain: return 6;
    case ErrorCategory::Index: return 7;
    case ErrorCategory::PositiveDefiniteness: return 8;
    case ErrorCategory::Sampler: return 9;
    case ErrorCategory::InvalidState: return 10;
  }
  return 1;
}

}  // namespace dpmf
