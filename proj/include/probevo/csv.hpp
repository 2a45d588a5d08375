#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace probevo {

/// Report format for floating-point output: 12 significant digits.
std::string format_real(double value);

/// Quotes a field when it contains a comma, quote or line break (RFC 4180).
std::string csv_field(std::string_view text);

/// Splits one CSV record; handles quoted fields without embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace probevo
