#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gl0 {

/// Failure categories. The CLI maps each one to a distinct exit status.
enum class Errc {
  invalid_argument,
  dimension_mismatch,
  infeasible_point,
  infeasible_config,
  parse_error,
  io_error,
  format_error,
  limit_exceeded,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace gl0
