#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace abspm::csv {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_row(std::string_view line);

/// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string quote_if_needed(std::string_view field);

std::string quote(std::string_view field);

}  // namespace abspm::csv
