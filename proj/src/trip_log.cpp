#include "evdetect/trip_log.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "evdetect/config.hpp"

namespace evdetect {

using namespace std::chrono;

MonthMap MonthMap::london_default() {
  static constexpr std::array<int, 5> kWinter{11, 12, 1, 2, 3};
  return from_winter_months(kWinter);
}

MonthMap MonthMap::from_winter_months(std::span<const int> months) {
  MonthMap map;
  map.season_of_month.fill(Season::summer);
  for (const int m : months) {
    if (m < 1 || m > 12) throw DomainError("month out of range: " + std::to_string(m));
    map.season_of_month[static_cast<std::size_t>(m - 1)] = Season::winter;
  }
  return map;
}

namespace {

void validate(const std::vector<GpsSample>& samples, std::vector<std::size_t>& trip_starts) {
  if (samples.empty()) throw TripLogError("empty trip log");
  trip_starts.clear();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::size_t row = i + 1;
    if (s.trip_number < 1) throw TripLogError("trip number must be >= 1", row, s.trip_number);
    if (!(s.speed_mps >= 0.0)) throw TripLogError("negative speed", row, s.trip_number);
    if (i == 0) {
      trip_starts.push_back(0);
      continue;
    }
    const auto& prev = samples[i - 1];
    if (s.trip_number < prev.trip_number) {
      throw TripLogError("trip number decreases", row, s.trip_number);
    }
    if (s.trip_number == prev.trip_number) {
      if (s.timestamp - prev.timestamp != seconds{1}) {
        throw TripLogError("trip " + std::to_string(s.trip_number) + ": spacing violation at " +
                               format_timestamp(s.timestamp) + " (expected 1 s step)",
                           row, s.trip_number);
      }
    } else {
      if (i - trip_starts.back() < 2) {
        throw TripLogError("trip " + std::to_string(prev.trip_number) + " has fewer than 2 samples", row - 1,
                           prev.trip_number);
      }
      if (s.timestamp <= prev.timestamp) {
        throw TripLogError("timestamp " + format_timestamp(s.timestamp) + " does not increase", row,
                           s.trip_number);
      }
      trip_starts.push_back(i);
    }
  }
  if (samples.size() - trip_starts.back() < 2) {
    throw TripLogError("trip " + std::to_string(samples.back().trip_number) + " has fewer than 2 samples",
                       samples.size(), samples.back().trip_number);
  }
}

}  // namespace

TripLog::TripLog(std::vector<GpsSample> samples, Season season) : samples_(std::move(samples)), season_(season) {
  validate(samples_, trip_starts_);
}

TripLog TripLog::with_inferred_season(std::vector<GpsSample> samples, const MonthMap& months) {
  if (samples.empty()) throw TripLogError("empty trip log");
  const Season season = infer_season(samples, months);
  return TripLog(std::move(samples), season);
}

std::vector<std::span<const GpsSample>> TripLog::trips() const {
  std::vector<std::span<const GpsSample>> out;
  out.reserve(trip_starts_.size());
  for (std::size_t t = 0; t < trip_starts_.size(); ++t) {
    const std::size_t begin = trip_starts_[t];
    const std::size_t end = t + 1 < trip_starts_.size() ? trip_starts_[t + 1] : samples_.size();
    out.emplace_back(samples_.data() + begin, end - begin);
  }
  return out;
}

std::int64_t TripLog::total_duration_s() const {
  return static_cast<std::int64_t>(samples_.size() - trip_starts_.size());
}

double TripLog::total_distance_m() const {
  double d = 0.0;
  for (const auto trip : trips()) {
    for (std::size_t i = 0; i + 1 < trip.size(); ++i) d += trip[i].speed_mps;
  }
  return d;
}

TripLog TripLog::concatenated(const TripLog& other) const {
  std::vector<GpsSample> all = samples_;
  const int offset = samples_.back().trip_number;
  for (auto s : other.samples_) {
    s.trip_number += offset;
    all.push_back(s);
  }
  return TripLog(std::move(all), season_);
}

Season infer_season(std::span<const GpsSample> samples, const MonthMap& months) {
  if (samples.empty()) throw DomainError("cannot infer season of an empty log");
  const year_month_day ymd{floor<days>(samples.front().timestamp)};
  return months(static_cast<unsigned>(ymd.month()));
}

std::size_t trip_count(const TripLog& log) { return log.trip_count(); }
std::int64_t total_duration(const TripLog& log) { return log.total_duration_s(); }

Timestamp parse_timestamp(std::string_view text) {
  text = trim(text);
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
  // YYYY-MM-DDTHH:MM:SS
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    throw ParseError("bad timestamp '" + std::string(text) + "' (expected YYYY-MM-DDTHH:MM:SSZ)");
  }
  const auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') throw ParseError("bad timestamp '" + std::string(text) + "'");
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  const year_month_day ymd{year{num(0, 4)}, month{static_cast<unsigned>(num(5, 2))},
                           day{static_cast<unsigned>(num(8, 2))}};
  const int hh = num(11, 2), mm = num(14, 2), ss = num(17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
    throw ParseError("invalid date/time '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp ts) {
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> tod{ts - day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                static_cast<long long>(tod.seconds().count()));
  return buf;
}

TripLog parse_gps_csv(std::istream& in, const MonthMap& months) {
  std::string line;
  if (!std::getline(in, line)) throw TripLogError("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kGpsCsvHeader) {
    throw TripLogError("bad header '" + line + "' (expected '" + std::string(kGpsCsvHeader) + "')");
  }
  std::vector<GpsSample> samples;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) {
      throw TripLogError("malformed row: expected 4 fields, got " + std::to_string(fields.size()), row);
    }
    GpsSample s;
    try {
      const auto trip = parse_int(fields[0]);
      if (trip < 1 || trip > std::numeric_limits<int>::max()) throw ParseError("trip number out of range");
      s.trip_number = static_cast<int>(trip);
      s.timestamp = parse_timestamp(fields[1]);
      s.speed_mps = parse_double(fields[2]);
      s.altitude_m = parse_double(fields[3]);
    } catch (const ParseError& e) {
      throw TripLogError(std::string("malformed row: ") + e.what(), row);
    }
    samples.push_back(s);
  }
  if (samples.empty()) throw TripLogError("empty file (header only)");
  return TripLog::with_inferred_season(std::move(samples), months);
}

TripLog load_gps_csv(const std::string& path, const MonthMap& months) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return parse_gps_csv(in, months);
  } catch (const TripLogError& e) {
    throw e.with_prefix(path + ": ");
  }
}

void write_gps_csv(std::ostream& out, const TripLog& log) {
  out << kGpsCsvHeader << '\n';
  for (const auto& s : log.samples()) {
    out << s.trip_number << ',' << format_timestamp(s.timestamp) << ',' << format_double(s.speed_mps) << ','
        << format_double(s.altitude_m) << '\n';
  }
}

std::string to_gps_csv(const TripLog& log) {
  std::ostringstream out;
  write_gps_csv(out, log);
  return out.str();
}

}  // namespace evdetect
