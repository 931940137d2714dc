#include "likratio/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <string>

#include <fmt/format.h>

#include "likratio/errors.hpp"

namespace likratio::csv {

std::string format_real(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  return fmt::format("{:.17g}", value);
}

double parse_real(std::string_view text) {
  const std::string buffer(text);
  if (buffer.empty()) throw IoError("expected a number, found an empty field");
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(buffer.c_str(), &end);
  if (end != buffer.c_str() + buffer.size()) {
    throw IoError("malformed number '" + buffer + "'");
  }
  // ERANGE on subnormal results is harmless: strtod still returns the
  // correctly rounded value.
  return value;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace likratio::csv
