#include "mlpg/error.hpp"

namespace mlpg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_layer_count: return "invalid-layer-count";
    case ErrorCode::unsupported_layer_count: return "unsupported-layer-count";
    case ErrorCode::mesh_too_coarse: return "mesh-too-coarse";
    case ErrorCode::eta_condition_violated: return "eta-condition-violated";
    case ErrorCode::g_not_zero_on_boundary: return "g-not-zero-on-boundary";
    case ErrorCode::wrong_space_tag: return "wrong-space-tag";
    case ErrorCode::layout_mismatch: return "layout-mismatch";
    case ErrorCode::singular_diagonal_block: return "singular-diagonal-block";
    case ErrorCode::singular_matrix: return "singular-matrix";
    case ErrorCode::too_large: return "too-large";
    case ErrorCode::unknown_test_id: return "unknown-test-id";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown-error";
}

}  // namespace mlpg
