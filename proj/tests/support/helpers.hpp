#pragma once

#include <chrono>
#include <random>
#include <vector>

#include "evdetect/predictor.hpp"
#include "evdetect/trip_log.hpp"
#include "oracles.hpp"

namespace testing {

inline evdetect::Timestamp at(int seconds_after_epoch_day) {
  using namespace std::chrono;
  return sys_days{2024y / July / 7d} + seconds{seconds_after_epoch_day};
}

/// Log of `trips` trips, each with `samples` 1 s samples; speeds and altitudes drawn
/// at random. Trips are one hour apart.
inline evdetect::TripLog random_log(std::mt19937_64& rng, int trips, int samples, bool flat = false,
                                    double v_max = 30.0) {
  std::uniform_real_distribution<double> speed(0.0, v_max);
  std::uniform_real_distribution<double> climb(-1.0, 1.0);
  std::vector<evdetect::GpsSample> s;
  double h = 50.0;
  for (int k = 0; k < trips; ++k) {
    for (int i = 0; i < samples; ++i) {
      if (!flat) h += climb(rng);
      s.push_back({k + 1, at(k * 3600 + i), speed(rng), flat ? 0.0 : h});
    }
  }
  return evdetect::TripLog(std::move(s), evdetect::Season::summer);
}

inline std::vector<oracle::Sample> to_oracle(const evdetect::TripLog& log) {
  std::vector<oracle::Sample> out;
  for (const auto& s : log.samples()) out.push_back({s.trip_number, s.speed_mps, s.altitude_m});
  return out;
}

inline evdetect::EmpiricalDist to_dist(const oracle::Bins& b, double width = 0.1) {
  evdetect::EmpiricalDist d;
  d.bin_width = width;
  d.first_bin = b.begin()->first;
  for (auto j = d.first_bin; j <= b.rbegin()->first; ++j) {
    auto it = b.find(j);
    d.masses.push_back(it == b.end() ? 0.0 : it->second);
  }
  d.sample_count = 1;
  return d;
}

}  // namespace testing
