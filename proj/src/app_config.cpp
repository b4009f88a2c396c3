#include "evdetect/app_config.hpp"

namespace evdetect {

void AppConfig::validate() const {
  params.validate();
  mass.validate();
  aux.validate();
  undeclared.validate(params.e_max_kwh);
  thresholds.validate();
  if (!(bin_width > 0.0)) throw DomainError("bin width must be > 0");
  if (samples == 0) throw DomainError("sample count must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0,1]");
  if (g_max && !(*g_max >= 0.0)) throw DomainError("g_max must be >= 0");
  slab_grid(undeclared, bin_width);
}

AppConfig app_config_from(const KeyValueFile& kv) {
  AppConfig cfg;
  if (auto path = kv.get_string("ev_params")) {
    std::filesystem::path p = *path;
    if (p.is_relative()) p = kv.base_dir() / p;
    cfg.params = load_ev_params(p.string());
  }
  if (auto v = kv.get_double("g")) cfg.consts.g = *v;
  if (auto v = kv.get_double("rho_air")) cfg.consts.rho_air = *v;
  cfg.undeclared.x_u_max_kwh = cfg.params.e_max_kwh;
  apply_overrides(kv, cfg.mass, cfg.aux, cfg.undeclared);
  if (auto v = kv.get_double("threshold_h0")) cfg.thresholds.accept_h0_max = *v;
  if (auto v = kv.get_double("threshold_h1")) cfg.thresholds.accept_h1_above = *v;
  if (auto v = kv.get_double("bin_width_kwh")) cfg.bin_width = *v;
  if (auto v = kv.get_uint("samples")) cfg.samples = *v;
  if (auto v = kv.get_uint("seed")) cfg.seed = *v;
  if (auto v = kv.get_string("driver_state")) {
    std::filesystem::path p = *v;
    cfg.driver_state = p.is_relative() ? kv.base_dir() / p : p;
  }
  if (auto months = kv.get_ints("winter_months")) cfg.months = MonthMap::from_winter_months(*months);
  if (auto v = kv.get_double("lambda")) cfg.lambda = *v;
  if (auto v = kv.get_double("g_max")) cfg.g_max = *v;
  if (auto v = kv.get_uint("threads")) cfg.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, *v));
  cfg.validate();
  return cfg;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::load(path);
  auto cfg = app_config_from(kv);
  kv.check_all_consumed();
  return cfg;
}

void apply_trip_gen_keys(const KeyValueFile& kv, TripGenConfig& cfg) {
  if (auto v = kv.get_int("n_trips")) cfg.n_trips = static_cast<int>(*v);
  if (auto v = kv.get_double("mean_trip_duration_s")) cfg.mean_trip_duration_s = *v;
  if (auto v = kv.get_double("duration_jitter")) cfg.duration_jitter = *v;
  if (auto v = kv.get_double("cruise_mean_mps")) cfg.cruise_mean_mps = *v;
  if (auto v = kv.get_double("cruise_sd_mps")) cfg.cruise_sd_mps = *v;
  if (auto v = kv.get_double("speed_noise_mps")) cfg.speed_noise_mps = *v;
  if (auto v = kv.get_double("reversion_per_s")) cfg.reversion_per_s = *v;
  if (auto v = kv.get_double("accel_bound_mps2")) cfg.accel_bound_mps2 = *v;
  if (auto v = kv.get_double("stop_rate_per_s")) cfg.stop_rate_per_s = *v;
  if (auto v = kv.get_double("dwell_mean_s")) cfg.dwell_mean_s = *v;
  if (auto v = kv.get_double("max_grade")) cfg.max_grade = *v;
  if (auto v = kv.get_double("grade_smoothness")) cfg.grade_smoothness = *v;
  if (auto v = kv.get_double("start_altitude_m")) cfg.start_altitude_m = *v;
  if (auto v = kv.get_double("interval_days")) cfg.interval_days = *v;
  if (auto v = kv.get_uint("trip_seed")) cfg.seed = *v;
  if (auto v = kv.get_string("start")) {
    try {
      cfg.start = parse_timestamp(*v);
    } catch (const ParseError& e) {
      throw ParseError(kv.source_name() + ": key 'start': " + e.what());
    }
  }
  cfg.validate();
}

TripGenConfig load_trip_gen_config(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::load(path);
  TripGenConfig cfg;
  apply_trip_gen_keys(kv, cfg);
  kv.check_all_consumed();
  return cfg;
}

StudyConfig study_config_from(const KeyValueFile& kv) {
  const AppConfig app = app_config_from(kv);
  StudyConfig s;
  s.params = app.params;
  s.consts = app.consts;
  s.mass = app.mass;
  s.aux = app.aux;
  s.undeclared = app.undeclared;
  s.thresholds = app.thresholds;
  s.bin_width = app.bin_width;
  s.predictor_samples = app.samples;
  s.master_seed = app.seed;
  s.threads = app.threads;
  if (auto v = kv.get_uint("trials_per_season")) s.trials_per_season = *v;
  if (auto v = kv.get_double("p1_sim")) s.p1_sim = *v;
  if (auto v = kv.get_string("seasons")) {
    s.seasons.clear();
    for (const auto part : split(*v, ',')) s.seasons.push_back(parse_season(part));
  }
  if (auto v = kv.get_double("mass_scale")) s.mass_scale = *v;
  if (auto v = kv.get_double("power_scale")) s.power_scale = *v;
  if (auto v = kv.get_bool("exclude_infeasible")) s.exclude_infeasible = *v;
  if (auto v = kv.get_uint("posterior_bins")) s.posterior_bins = *v;
  apply_trip_gen_keys(kv, s.trips);
  s.validate();
  return s;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::load(path);
  auto cfg = study_config_from(kv);
  kv.check_all_consumed();
  return cfg;
}

}  // namespace evdetect
