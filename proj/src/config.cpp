#include "evdetect/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "evdetect/common.hpp"

namespace evdetect {

std::string_view to_string(Season s) { return s == Season::summer ? "summer" : "winter"; }

std::string_view to_string(Hypothesis h) { return h == Hypothesis::h0 ? "H0" : "H1"; }

Season parse_season(std::string_view text) {
  text = trim(text);
  if (text == "summer" || text == "s") return Season::summer;
  if (text == "winter" || text == "w") return Season::winter;
  throw DomainError("unknown season '" + std::string(text) + "' (expected summer or winter)");
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ParseError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& source_name) {
  KeyValueFile kv;
  kv.source_ = source_name;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source_name + ": expected 'key = value'", lineno);
    }
    const std::string key(trim(view.substr(0, eq)));
    const std::string value(trim(view.substr(eq + 1)));
    if (key.empty()) throw ParseError(source_name + ": empty key", lineno);
    if (kv.entries_.count(key)) throw ParseError(source_name + ": duplicate key '" + key + "'", lineno);
    kv.entries_[key] = Entry{value, lineno};
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  auto kv = parse(in, path.string());
  kv.base_dir_ = path.parent_path();
  return kv;
}

bool KeyValueFile::has(const std::string& key) const { return entries_.count(key) != 0; }

void KeyValueFile::set(const std::string& key, const std::string& value) {
  entries_[key] = Entry{value, 0};
}

const KeyValueFile::Entry* KeyValueFile::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

void KeyValueFile::fail(const std::string& key, const std::string& what) const {
  const auto it = entries_.find(key);
  throw ParseError(source_ + ": key '" + key + "': " + what, it == entries_.end() ? 0 : it->second.line);
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  return e->value;
}

std::optional<double> KeyValueFile::get_double(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  try {
    return parse_double(e->value);
  } catch (const ParseError& err) {
    fail(key, err.what());
  }
}

std::optional<std::int64_t> KeyValueFile::get_int(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  try {
    return parse_int(e->value);
  } catch (const ParseError& err) {
    fail(key, err.what());
  }
}

std::optional<std::uint64_t> KeyValueFile::get_uint(const std::string& key) const {
  const auto v = get_int(key);
  if (!v) return std::nullopt;
  if (*v < 0) fail(key, "must be non-negative");
  return static_cast<std::uint64_t>(*v);
}

std::optional<bool> KeyValueFile::get_bool(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  fail(key, "expected true or false");
}

std::optional<std::vector<double>> KeyValueFile::get_doubles(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  std::vector<double> out;
  try {
    for (const auto part : split(e->value, ',')) out.push_back(parse_double(part));
  } catch (const ParseError& err) {
    fail(key, err.what());
  }
  return out;
}

std::optional<std::vector<int>> KeyValueFile::get_ints(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  std::vector<int> out;
  try {
    for (const auto part : split(e->value, ',')) out.push_back(static_cast<int>(parse_int(part)));
  } catch (const ParseError& err) {
    fail(key, err.what());
  }
  return out;
}

void KeyValueFile::check_all_consumed() const {
  for (const auto& [key, entry] : entries_) {
    if (!consumed_.count(key)) throw ParseError(source_ + ": unknown key '" + key + "'", entry.line);
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace evdetect
