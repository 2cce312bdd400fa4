#pragma once

#include <stdexcept>
#include <string>

namespace conbandit {

enum class ErrorCode {
  invalid_dimension,
  invalid_strategy,
  invalid_config,
  invalid_argument,
  out_of_range,
  infeasible_lp,
  infeasible_instance,
  oracle_scope,
  mode_mismatch,
  invalid_benchmark,
  missing_ground_truth,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace conbandit
