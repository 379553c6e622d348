#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mdsgnn {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Strict parsers; context prefixes the error message (file:line style).
double parse_double(std::string_view s, const std::string& context);
long long parse_int(std::string_view s, const std::string& context);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

// Reads a whole file; throws DataError when missing.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace mdsgnn
