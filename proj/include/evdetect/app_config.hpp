#pragma once

#include <filesystem>
#include <optional>

#include "evdetect/config.hpp"
#include "evdetect/detector.hpp"
#include "evdetect/ev_physics.hpp"
#include "evdetect/scenario_sim.hpp"
#include "evdetect/stochastic_models.hpp"
#include "evdetect/trip_log.hpp"

namespace evdetect {

/// Settings shared by the predict / detect commands.
struct AppConfig {
  EvParams params;
  PhysicsConstants consts;
  MassModel mass;
  AuxPowerModel aux;
  UndeclaredModel undeclared;
  Thresholds thresholds;
  double bin_width = 0.1;
  std::size_t samples = 10'000;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> driver_state;
  MonthMap months = MonthMap::london_default();
  double lambda = 1.0;
  std::optional<double> g_max;
  unsigned threads = 1;

  void validate() const;
};

/// Reads every AppConfig key present in `kv`; absent keys keep their defaults.
/// `ev_params` names an EV parameter file relative to the config file; the slab
/// upper bound defaults to that EV's capacity.
AppConfig app_config_from(const KeyValueFile& kv);
AppConfig load_app_config(const std::filesystem::path& path);

void apply_trip_gen_keys(const KeyValueFile& kv, TripGenConfig& cfg);
TripGenConfig load_trip_gen_config(const std::filesystem::path& path);

/// AppConfig keys (seed becomes the master seed) plus study and trip-generator keys.
StudyConfig study_config_from(const KeyValueFile& kv);
StudyConfig load_study_config(const std::filesystem::path& path);

}  // namespace evdetect
