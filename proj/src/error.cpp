#include "vpinv/error.hpp"

namespace vpinv {

std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_config: return "invalid-config";
        case ErrorCode::no_intersection: return "no-intersection";
        case ErrorCode::not_on_boundary: return "not-on-boundary";
        case ErrorCode::singular_kernel: return "singular-kernel";
        case ErrorCode::no_analytic_reference: return "no-analytic-reference";
        case ErrorCode::degenerate_exit: return "degenerate-exit";
        case ErrorCode::outgoing_injection: return "outgoing-injection";
        case ErrorCode::below_threshold: return "below-threshold";
        case ErrorCode::non_contraction: return "non-contraction";
        case ErrorCode::trapped: return "trapped";
        case ErrorCode::left_grid: return "left-grid";
        case ErrorCode::non_uniform_sampling: return "non-uniform-sampling";
        case ErrorCode::too_many_failures: return "too-many-failures";
        case ErrorCode::io_error: return "io-error";
    }
    return "unknown";
}

bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_config:
        case ErrorCode::no_intersection:
        case ErrorCode::not_on_boundary:
        case ErrorCode::outgoing_injection:
        case ErrorCode::below_threshold:
        case ErrorCode::non_uniform_sampling:
        case ErrorCode::no_analytic_reference:
            return true;
        default:
            return false;
    }
}

}  // namespace vpinv
