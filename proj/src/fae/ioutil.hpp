#pragma once

#include <cstdint>
#include <string>

namespace fae {

// %.17g — lossless decimal round-trip for doubles.
std::string format_double(double v);

// Strict full-token parses; throw DataError naming the token on failure.
double parse_double(const std::string& token);
std::int64_t parse_int(const std::string& token);

// Write-to-temp-then-rename; the final path never holds a partial file.
void atomic_write_file(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);  // throws IoError if unreadable

}  // namespace fae
