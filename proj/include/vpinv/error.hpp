#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpinv {

enum class ErrorCode {
    invalid_config,
    no_intersection,
    not_on_boundary,
    singular_kernel,
    no_analytic_reference,
    degenerate_exit,
    outgoing_injection,
    below_threshold,
    non_contraction,
    trapped,
    left_grid,
    non_uniform_sampling,
    too_many_failures,
    io_error,
};

/// Machine-readable name, e.g. "no-intersection".
std::string_view error_name(ErrorCode code);

/// True for errors caused by bad input or configuration (CLI exit code 2).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

  private:
    ErrorCode code_;
};

}  // namespace vpinv
