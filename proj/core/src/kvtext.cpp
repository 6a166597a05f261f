#include "hwml/kvtext.hpp"

#include <cerrno>
#include <cstdlib>

#include "hwml/error.hpp"

namespace hwml {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

double parse_double(std::string_view text) {
  const std::string value = trim(text);
  if (value.empty()) throw ConfigError("empty numeric value");
  errno = 0;
  char* end = nullptr;
  const double parsed = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || errno == ERANGE)
    throw ConfigError("invalid number '" + value + "'");
  return parsed;
}

KeyValueText KeyValueText::parse(std::string_view text) {
  KeyValueText kv;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string line(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    std::string key = trim(std::string_view(content).substr(0, eq));
    std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (kv.entries_.count(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
    kv.lines_[key] = line_no;
    kv.entries_[std::move(key)] = std::move(value);
  }
  return kv;
}

const std::string& KeyValueText::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

double KeyValueText::get_double(const std::string& key) const {
  try {
    return parse_double(get(key));
  } catch (const ConfigError& e) {
    if (!has(key)) throw;
    throw ParseError(line_of(key), "key '" + key + "': " + e.what());
  }
}

long long KeyValueText::get_int(const std::string& key) const {
  const std::string& value = get(key);
  char* end = nullptr;
  errno = 0;
  const long long parsed = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE)
    throw ParseError(line_of(key), "key '" + key + "': invalid integer '" + value + "'");
  return parsed;
}

std::size_t KeyValueText::line_of(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

void KeyValueText::require_only(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : entries_)
    if (!allowed.count(key)) throw ParseError(line_of(key), "unknown key '" + key + "'");
}

}  // namespace hwml
