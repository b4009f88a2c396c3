#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evdetect/trip_log.hpp"

namespace evdetect {

/// Per-driver record carried from one certified charge to the next.
struct DriverState {
  std::string driver_id;
  double p1 = 0.5;
  std::optional<double> last_certified_soc_kwh;
  std::optional<Timestamp> last_certified_timestamp;

  bool operator==(const DriverState&) const = default;
};

/// CSV file `driver_id,p1,last_certified_soc_kwh,last_certified_timestamp`, one row
/// per driver, rewritten atomically on save.
class DriverStateStore {
 public:
  DriverStateStore() = default;
  /// A missing file yields an empty store.
  static DriverStateStore load(const std::filesystem::path& path);
  static DriverStateStore parse(std::istream& in);

  const DriverState* find(const std::string& driver_id) const;
  void upsert(const DriverState& state);
  const std::vector<DriverState>& rows() const { return rows_; }

  std::string to_csv() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<DriverState> rows_;
};

}  // namespace evdetect
