#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace foodpair {

// Shortest decimal string that parses back to exactly `value`.
std::string format_shortest(double value);

// Fixed-point with `decimals` digits after the point ("%.6f" style).
std::string format_fixed(double value, int decimals);

// Strict parsers: the whole field must be consumed.
double parse_double(std::string_view field);
std::int64_t parse_int(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep);

// Reads a whole file; throws InputError when it cannot be opened.
std::string read_file(const std::string& path);
// Writes atomically enough for our purposes: truncate + write + flush check.
void write_file(const std::string& path, std::string_view contents);

}  // namespace foodpair
