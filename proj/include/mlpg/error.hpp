#pragma once

#include <stdexcept>
#include <string>

namespace mlpg {

enum class ErrorCode {
  invalid_argument = 1,
  invalid_layer_count,
  unsupported_layer_count,
  mesh_too_coarse,
  eta_condition_violated,
  g_not_zero_on_boundary,
  wrong_space_tag,
  layout_mismatch,
  singular_diagonal_block,
  singular_matrix,
  too_large,
  unknown_test_id,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mlpg
