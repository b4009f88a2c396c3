#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evdetect/common.hpp"

namespace evdetect {

using Timestamp = std::chrono::sys_seconds;

/// One 1 Hz GPS record: trip label, UTC time, speed and altitude.
struct GpsSample {
  int trip_number = 1;
  Timestamp timestamp{};
  double speed_mps = 0.0;
  double altitude_m = 0.0;

  bool operator==(const GpsSample&) const = default;
};

/// Maps each calendar month (index 0 = January) to a season.
struct MonthMap {
  std::array<Season, 12> season_of_month{};

  /// November to March are winter, April to October summer.
  static MonthMap london_default();
  /// Builds a map from the list of winter months (1..12); every other month is summer.
  static MonthMap from_winter_months(std::span<const int> months);

  Season operator()(unsigned month) const { return season_of_month.at(month - 1); }
};

/// Raised when a GPS record violates a TripLog invariant. `row()` is the 1-based
/// data row (header excluded) when the error came from a CSV, 0 otherwise.
class TripLogError : public ParseError {
 public:
  TripLogError(const std::string& what, std::size_t row = 0, int trip = 0)
      : ParseError(row ? "row " + std::to_string(row) + ": " + what : what), row_(row), trip_(trip) {}
  std::size_t row() const noexcept { return row_; }
  int trip() const noexcept { return trip_; }
  /// Same error with `prefix` prepended to the message.
  TripLogError with_prefix(const std::string& prefix) const { return TripLogError(prefix + what(), row_, trip_, 0); }

 private:
  TripLogError(const std::string& message, std::size_t row, int trip, int)
      : ParseError(message), row_(row), trip_(trip) {}

  std::size_t row_;
  int trip_;
};

/// Validated multi-trip GPS record for one certified interval.
///
/// Invariants (checked on construction): speeds >= 0, trip numbers >= 1 and
/// non-decreasing, every trip has at least two samples spaced exactly 1 s apart,
/// timestamps strictly increasing across the whole log.
class TripLog {
 public:
  TripLog(std::vector<GpsSample> samples, Season season);
  /// Validates and infers the season from the first sample.
  static TripLog with_inferred_season(std::vector<GpsSample> samples,
                                      const MonthMap& months = MonthMap::london_default());

  std::span<const GpsSample> samples() const { return samples_; }
  Season season() const { return season_; }

  /// One contiguous span per trip, in log order.
  std::vector<std::span<const GpsSample>> trips() const;
  std::size_t trip_count() const { return trip_starts_.size(); }
  /// T_c: sum over trips of (samples - 1) seconds.
  std::int64_t total_duration_s() const;
  /// Sum of speed over every 1 s step (metres).
  double total_distance_m() const;

  /// Appends `other` after this log. Trip numbers of `other` are offset so labels stay
  /// non-decreasing; `other` must start after this log ends.
  TripLog concatenated(const TripLog& other) const;

  bool operator==(const TripLog& other) const {
    return season_ == other.season_ && samples_ == other.samples_;
  }

 private:
  std::vector<GpsSample> samples_;
  std::vector<std::size_t> trip_starts_;
  Season season_;
};

/// Season of the first sample's month.
Season infer_season(std::span<const GpsSample> samples, const MonthMap& months = MonthMap::london_default());

std::size_t trip_count(const TripLog& log);
std::int64_t total_duration(const TripLog& log);

/// `YYYY-MM-DDTHH:MM:SSZ`. A trailing `Z` is optional on input.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

inline constexpr std::string_view kGpsCsvHeader = "trip,timestamp,speed_mps,altitude_m";

/// Parses the GPS CSV (header `trip,timestamp,speed_mps,altitude_m`, LF or CRLF).
TripLog parse_gps_csv(std::istream& in, const MonthMap& months = MonthMap::london_default());
TripLog load_gps_csv(const std::string& path, const MonthMap& months = MonthMap::london_default());
void write_gps_csv(std::ostream& out, const TripLog& log);
std::string to_gps_csv(const TripLog& log);

}  // namespace evdetect
