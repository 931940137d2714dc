#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "likratio_cli/config.hpp"

namespace likratio::cli {

struct Subcommand {
  std::string name;
  std::string summary;
  Schema schema;
};

/// Every subcommand with its accepted keys.
const std::vector<Subcommand>& subcommands();

/// `<subcommand> [--config <path>] [--out <path>] [--key value]...`.
/// Returns 0 on success, 2 on a configuration or usage error, 1 on a
/// runtime failure. Results go to `out` unless --out names a file.
int parse_and_dispatch(std::span<const std::string> args, std::ostream& out,
                       std::ostream& err);
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out,
                       std::ostream& err);

}  // namespace likratio::cli
