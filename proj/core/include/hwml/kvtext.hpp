#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

namespace hwml {

// `key = value` lines; '#' starts a comment; blank lines ignored.
// Keys are unique. Values keep interior whitespace, trimmed at both ends.
class KeyValueText {
 public:
  static KeyValueText parse(std::string_view text);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::size_t line_of(const std::string& key) const;

  // Throws ParseError naming the first key outside `allowed`.
  void require_only(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  std::map<std::string, std::size_t> lines_;
};

double parse_double(std::string_view text);
std::string trim(std::string_view text);

}  // namespace hwml
