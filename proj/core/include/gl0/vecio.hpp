#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "gl0/constraint.hpp"

namespace gl0 {

/// One value per line, 17 significant digits.
std::string format_vector(std::span<const double> v);
std::vector<double> parse_vector(const std::string& text);
void write_vector(const std::string& path, std::span<const double> v);
std::vector<double> read_vector(const std::string& path);

/// Whitespace-separated: n, then n group sizes, n penalties, and the budget.
std::string format_partition(const GroupPartition& part);
GroupPartition parse_partition(const std::string& text);
GroupPartition read_partition(const std::string& path);

/// Ordered key=value pairs; `#` starts a comment, blank lines are skipped.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues parse_key_values(const std::string& text, const std::string& origin = "input");
std::string format_key_values(const KeyValues& kv);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Strict decimal parse of the whole string.
double parse_double(const std::string& text, const std::string& what);
std::size_t parse_count(const std::string& text, const std::string& what);

}  // namespace gl0
