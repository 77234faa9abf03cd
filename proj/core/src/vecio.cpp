#include "gl0/vecio.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gl0/error.hpp"

namespace gl0 {

double parse_double(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size() ||
      (errno == ERANGE && std::isinf(v))) {
    fail(Errc::parse_error, fmt::format("{}: '{}' is not a decimal number", what, text));
  }
  return v;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  const double v = parse_double(text, what);
  if (!(v >= 0.0) || std::floor(v) != v || v > 9007199254740992.0) {
    fail(Errc::parse_error,
         fmt::format("{}: '{}' is not a nonnegative integer", what, text));
  }
  return static_cast<std::size_t>(v);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_error, fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) fail(Errc::io_error, fmt::format("write to '{}' failed", path));
}

std::string format_vector(std::span<const double> v) {
  std::string out;
  for (double x : v) out += fmt::format("{:.17g}\n", x);
  return out;
}

std::vector<double> parse_vector(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, fmt::format("entry {}", out.size() + 1)));
  return out;
}

void write_vector(const std::string& path, std::span<const double> v) {
  write_text(path, format_vector(v));
}

std::vector<double> read_vector(const std::string& path) {
  return parse_vector(read_text(path));
}

std::string format_partition(const GroupPartition& part) {
  std::string out = fmt::format("{}\n", part.groups());
  for (std::size_t i = 0; i < part.groups(); ++i) {
    out += fmt::format("{}{}", i ? " " : "", part.dims()[i]);
  }
  out += "\n";
  for (std::size_t i = 0; i < part.groups(); ++i) {
    out += fmt::format("{}{:.17g}", i ? " " : "", part.penalties()[i]);
  }
  out += fmt::format("\n{:.17g}\n", part.budget());
  return out;
}

GroupPartition parse_partition(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  require(!tokens.empty(), Errc::parse_error, "partition: empty input");
  const std::size_t n = parse_count(tokens[0], "partition group count");
  require(tokens.size() == 2 * n + 2, Errc::parse_error,
          fmt::format("partition: expected {} tokens for {} groups, found {}", 2 * n + 2, n,
                      tokens.size()));
  std::vector<std::size_t> dims(n);
  std::vector<double> penalties(n);
  for (std::size_t i = 0; i < n; ++i) {
    dims[i] = parse_count(tokens[1 + i], fmt::format("group size {}", i + 1));
    penalties[i] = parse_double(tokens[1 + n + i], fmt::format("penalty {}", i + 1));
  }
  const double budget = parse_double(tokens[1 + 2 * n], "budget");
  return {std::move(dims), std::move(penalties), budget};
}

GroupPartition read_partition(const std::string& path) {
  return parse_partition(read_text(path));
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, Errc::parse_error,
            fmt::format("{}:{}: expected key=value", origin, lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), Errc::parse_error, fmt::format("{}:{}: empty key", origin, lineno));
    for (const auto& [k, v] : out) {
      require(k != key, Errc::parse_error,
              fmt::format("{}:{}: duplicate key '{}'", origin, lineno, key));
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += fmt::format("{}={}\n", k, v);
  return out;
}

}  // namespace gl0
