#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace likratio::cli {

/// Bad configuration or usage; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string name;
  std::string help;
  /// Absent means the key is required.
  std::optional<std::string> default_value;
};

using Schema = std::vector<KeySpec>;
using RawValues = std::map<std::string, std::string>;

/// Lowercase, with '-' folded to '_', so `--sigma-eta` and `sigma_eta` agree.
std::string normalize_key(std::string_view key);

/// `key = value` lines; '#' starts a comment; blank lines ignored.
/// Later duplicates win.
RawValues parse_config_text(std::string_view text, std::string_view origin = "config");
RawValues load_config_file(const std::filesystem::path& path);

/// Typed view over validated values.
class Settings {
 public:
  Settings(const Schema& schema, RawValues values);

  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  std::uint64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;
  /// Value must be one of `choices`.
  const std::string& choice(const std::string& key,
                            std::initializer_list<std::string_view> choices) const;

 private:
  RawValues values_;
};

/// Merges file values and overrides (overrides win), rejects unknown keys
/// with the list of valid ones, fills defaults and reports the first
/// missing required key.
Settings resolve(const Schema& schema, const RawValues& file_values,
                 const RawValues& overrides);

}  // namespace likratio::cli
