#pragma once

#include <string>
#include <vector>

namespace soundmap::csv {

/// Splits one CSV line. Fields may be double-quoted; `""` inside a quoted
/// field is a literal quote. No embedded newlines.
std::vector<std::string> split_line(const std::string& line);

/// Quotes the field if it contains a comma, quote, or leading/trailing space.
std::string escape_field(const std::string& field);

/// Full-precision, locale-independent float formatting (round-trips exactly).
std::string format_double(double value);

} // namespace soundmap::csv
