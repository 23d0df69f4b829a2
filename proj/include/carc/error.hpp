#pragma once

#include <stdexcept>
#include <string>

namespace carc {

enum class ErrorCode {
  invalid_rule,
  invalid_parameter,
  topology_mismatch,
  dimension_mismatch,
  numerical_failure,
  unsupported_rule,
  config_mismatch,
  io_failure,
  not_found,
  too_large,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_{code} {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace carc
