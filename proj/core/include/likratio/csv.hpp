#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace likratio::csv {

/// 17 significant digits, so a parse of the text restores the exact double.
/// Infinities render as `inf` / `-inf`.
std::string format_real(double value);

/// Inverse of format_real. Throws IoError on malformed text.
double parse_real(std::string_view text);

std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace likratio::csv
