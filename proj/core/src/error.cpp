#include "gl0/error.hpp"

namespace gl0 {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::infeasible_point: return "infeasible_point";
    case Errc::infeasible_config: return "infeasible_config";
    case Errc::parse_error: return "parse_error";
    case Errc::io_error: return "io_error";
    case Errc::format_error: return "format_error";
    case Errc::limit_exceeded: return "limit_exceeded";
  }
  return "unknown";
}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace gl0
