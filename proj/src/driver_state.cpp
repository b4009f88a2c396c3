#include "evdetect/driver_state.hpp"

#include <fstream>
#include <sstream>

#include "evdetect/config.hpp"

namespace evdetect {

namespace {
constexpr std::string_view kHeader = "driver_id,p1,last_certified_soc_kwh,last_certified_timestamp";
}

DriverStateStore DriverStateStore::parse(std::istream& in) {
  DriverStateStore store;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) return store;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw ParseError("driver state: bad header '" + line + "'", lineno);
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw ParseError("driver state: expected 4 fields", lineno);
    DriverState s;
    s.driver_id = std::string(trim(f[0]));
    if (s.driver_id.empty()) throw ParseError("driver state: empty driver id", lineno);
    try {
      s.p1 = parse_double(f[1]);
      if (!trim(f[2]).empty()) s.last_certified_soc_kwh = parse_double(f[2]);
      if (!trim(f[3]).empty()) s.last_certified_timestamp = parse_timestamp(f[3]);
    } catch (const ParseError& e) {
      throw ParseError(std::string("driver state: ") + e.what(), lineno);
    }
    if (!(s.p1 >= 0.0 && s.p1 <= 1.0)) throw ParseError("driver state: p1 outside [0,1]", lineno);
    if (store.find(s.driver_id)) throw ParseError("driver state: duplicate driver '" + s.driver_id + "'", lineno);
    store.rows_.push_back(std::move(s));
  }
  return store;
}

DriverStateStore DriverStateStore::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

const DriverState* DriverStateStore::find(const std::string& driver_id) const {
  for (const auto& r : rows_) {
    if (r.driver_id == driver_id) return &r;
  }
  return nullptr;
}

void DriverStateStore::upsert(const DriverState& state) {
  if (state.driver_id.empty() || state.driver_id.find_first_of(",\r\n") != std::string::npos) {
    throw DomainError("driver id must be non-empty and free of commas and newlines");
  }
  for (auto& r : rows_) {
    if (r.driver_id == state.driver_id) {
      r = state;
      return;
    }
  }
  rows_.push_back(state);
}

std::string DriverStateStore::to_csv() const {
  std::ostringstream s;
  s << kHeader << '\n';
  for (const auto& r : rows_) {
    s << r.driver_id << ',' << format_double(r.p1) << ','
      << (r.last_certified_soc_kwh ? format_double(*r.last_certified_soc_kwh) : "") << ','
      << (r.last_certified_timestamp ? format_timestamp(*r.last_certified_timestamp) : "") << '\n';
  }
  return s.str();
}

void DriverStateStore::save(const std::filesystem::path& path) const { write_file_atomic(path, to_csv()); }

}  // namespace evdetect
