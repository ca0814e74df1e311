#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace crashnet::io {

// Splits one CSV line on commas and strips a trailing '\r'. Quoting is not
// supported; symbols and dates in our inputs never contain commas.
std::vector<std::string> split_csv_line(std::string_view line);

// Splits text into lines on '\n'. A trailing newline does not produce an
// extra empty line.
std::vector<std::string> split_lines(std::string_view text);

// Strict double parse: rejects empty fields, NaN/Inf tokens, and trailing
// garbage. Returns false on failure.
bool parse_double(std::string_view text, double& out);

enum class FloatFormat {
  kSig6,  // 6 significant digits, the report default
  kFull,  // shortest string that round-trips the exact value
};

std::string format_double(double v, FloatFormat fmt);

// Reads a whole file into memory; throws DataError if it cannot be opened.
std::string read_file(const std::string& path);

// Writes text to path, creating parent directories as needed; throws
// DataError on I/O failure.
void write_file(const std::string& path, std::string_view text);

}  // namespace crashnet::io
