#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace evdetect {

/// Line-oriented `key = value` file. `#` starts a comment; blank lines are ignored.
///
/// Every getter marks its key as consumed so callers can reject typos with
/// `check_all_consumed()` once all readers have run.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(std::istream& in, const std::string& source_name = "<input>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<std::uint64_t> get_uint(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<double>> get_doubles(const std::string& key) const;
  std::optional<std::vector<int>> get_ints(const std::string& key) const;

  /// Throws ParseError naming the first key nobody read.
  void check_all_consumed() const;

  const std::string& source_name() const { return source_; }
  /// Directory of the file, for resolving relative paths inside it.
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> consumed_;
  std::string source_ = "<input>";
  std::filesystem::path base_dir_;
};

/// Strict double parse: the whole (trimmed) string must be a finite number.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace evdetect
