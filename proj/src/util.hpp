#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fraclap {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

/// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);
double parse_double(std::string_view text, const std::string& context);
long parse_long(std::string_view text, const std::string& context);

/// RFC 4180 quoting for one CSV field.
std::string csv_field(std::string_view text);

}  // namespace fraclap
