#pragma once

#include <stdexcept>
#include <string>

namespace voi {

enum class Errc {
  all_zero,
  negative_weight,
  non_finite,
  zero_evidence,
  missing_likelihood_row,
  dimension_mismatch,
  empty_action_set,
  malformed_matrix,
  degenerate_prior,
  empty_category,
  backend_unavailable,
  parse_failure,
  key_mismatch,
  out_of_range_sum,
  value_out_of_range,
  confidence_out_of_range,
  unknown_label,
  transport,
  estimator_failure,
  io,
  schema_version_mismatch,
  bad_config,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace voi
