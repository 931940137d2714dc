#include "likratio_cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace likratio::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> list_items(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  for (char c : value) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) items.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) items.push_back(std::move(current));
  return items;
}

double to_real(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_integer(const std::string& key, const std::string& text) {
  // Accepts 1e6-style literals as long as they are exact nonnegative integers.
  const double v = to_real(key, text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 9007199254740992.0) {
    throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + text + "'");
  }
  if (text.find_first_of(".eE") == std::string::npos) {
    return std::strtoull(text.c_str(), nullptr, 10);
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace

std::string normalize_key(std::string_view key) {
  std::string out;
  out.reserve(key.size());
  for (char c : key) {
    out.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

RawValues parse_config_text(std::string_view text, std::string_view origin) {
  RawValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
    }
    out[normalize_key(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

RawValues load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

Settings::Settings(const Schema& schema, RawValues values) : values_(std::move(values)) {
  for (const auto& spec : schema) {
    if (!values_.contains(spec.name)) {
      if (!spec.default_value) throw ConfigError("missing required key '" + spec.name + "'");
      values_[spec.name] = *spec.default_value;
    }
  }
}

const std::string& Settings::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

double Settings::real(const std::string& key) const { return to_real(key, text(key)); }

std::uint64_t Settings::integer(const std::string& key) const {
  return to_integer(key, text(key));
}

std::size_t Settings::count(const std::string& key) const {
  return static_cast<std::size_t>(integer(key));
}

bool Settings::flag(const std::string& key) const {
  const std::string v = normalize_key(text(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + text(key) + "'");
}

std::vector<double> Settings::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list_items(text(key))) out.push_back(to_real(key, item));
  if (out.empty()) throw ConfigError("'" + key + "' must list at least one value");
  return out;
}

std::vector<std::size_t> Settings::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : list_items(text(key))) {
    out.push_back(static_cast<std::size_t>(to_integer(key, item)));
  }
  if (out.empty()) throw ConfigError("'" + key + "' must list at least one value");
  return out;
}

const std::string& Settings::choice(const std::string& key,
                                    std::initializer_list<std::string_view> choices) const {
  const std::string& v = text(key);
  if (std::find(choices.begin(), choices.end(), v) != choices.end()) return v;
  std::string msg = "'" + key + "' must be one of:";
  for (auto c : choices) msg += " " + std::string(c);
  throw ConfigError(msg + " (got '" + v + "')");
}

Settings resolve(const Schema& schema, const RawValues& file_values,
                 const RawValues& overrides) {
  RawValues merged = file_values;
  for (const auto& [k, v] : overrides) merged[k] = v;
  for (const auto& [k, v] : merged) {
    const bool known = std::any_of(schema.begin(), schema.end(),
                                   [&](const KeySpec& s) { return s.name == k; });
    if (!known) {
      std::string msg = "unknown key '" + k + "'; valid keys:";
      for (const auto& s : schema) msg += " " + s.name;
      throw ConfigError(msg);
    }
  }
  return Settings(schema, std::move(merged));
}

}  // namespace likratio::cli
