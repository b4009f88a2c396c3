#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "evdetect/app_config.hpp"
#include "evdetect/detector.hpp"
#include "evdetect/driver_state.hpp"
#include "evdetect/predictor.hpp"
#include "evdetect/scenario_sim.hpp"
#include "evdetect/trip_log.hpp"

namespace fs = std::filesystem;
using namespace evdetect;

namespace {

constexpr int kExitError = 1;

struct CommonOptions {
  std::string config;
  std::string season = "auto";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> bin_width;
  std::optional<unsigned> threads;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Key-value configuration file");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--samples", o.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
  cmd->add_option("--bin-width", o.bin_width, "Histogram bin width (kWh)")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory");
}

void add_season(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--season", o.season, "Season used for the auxiliary-power prior")
      ->check(CLI::IsMember({"summer", "winter", "auto"}));
}

AppConfig resolve_app_config(const CommonOptions& o) {
  AppConfig cfg;
  if (!o.config.empty()) cfg = load_app_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.samples) cfg.samples = *o.samples;
  if (o.bin_width) cfg.bin_width = *o.bin_width;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

Season resolve_season(const std::string& flag, const TripLog& log) {
  return flag == "auto" ? log.season() : parse_season(flag);
}

fs::path output_dir(const CommonOptions& o) {
  fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

std::string fmt(double v) { return format_double(v); }

std::string stats_text(const DistStats& s, const TripLog& log, Season season) {
  std::ostringstream os;
  os << "season=" << to_string(season) << '\n'
     << "trips=" << log.trip_count() << '\n'
     << "duration_s=" << log.total_duration_s() << '\n'
     << "distance_km=" << fmt(log.total_distance_m() / 1000.0) << '\n'
     << "mean_kwh=" << fmt(s.mean) << '\n'
     << "variance_kwh2=" << fmt(s.variance) << '\n'
     << "mode_kwh=" << fmt(s.mode_center) << '\n'
     << "support_low_kwh=" << fmt(s.support_low) << '\n'
     << "support_high_kwh=" << fmt(s.support_high) << '\n';
  return os.str();
}

PredictorOptions predictor_options(const AppConfig& cfg) {
  return PredictorOptions{cfg.samples, cfg.bin_width, cfg.seed, cfg.threads};
}

int cmd_predict(const CommonOptions& o, const std::string& gps) {
  const AppConfig cfg = resolve_app_config(o);
  const TripLog log = load_gps_csv(gps, cfg.months);
  const Season season = resolve_season(o.season, log);
  const PredictorInputs in{log, cfg.params, cfg.consts, season, cfg.mass, cfg.aux};
  const EmpiricalDist xc = predict_xc(in, predictor_options(cfg));
  const std::string stats = stats_text(dist_stats(xc), log, season);
  const fs::path dir = output_dir(o);
  write_file_atomic(dir / "xc_histogram.csv", to_histogram_csv(xc));
  write_file_atomic(dir / "xc_stats.txt", stats);
  std::cout << stats;
  return 0;
}

struct DetectOptions {
  std::string gps;
  double x0 = 0.0;
  double x1 = 0.0;
  std::string driver;
  std::optional<double> p1;
  std::optional<double> lambda;
  std::optional<double> g_max;
  std::optional<double> soc_after;
  std::string state;
};

int exit_code(Decision d) {
  switch (d) {
    case Decision::h0:
      return 0;
    case Decision::h1:
      return 2;
    case Decision::erasure:
      return 3;
  }
  return kExitError;
}

int cmd_detect(const CommonOptions& o, const DetectOptions& d) {
  AppConfig cfg = resolve_app_config(o);
  if (d.lambda) cfg.lambda = *d.lambda;
  if (d.g_max) cfg.g_max = *d.g_max;
  if (!d.state.empty()) cfg.driver_state = fs::path(d.state);
  cfg.validate();

  const SocPair soc{d.x0, d.x1};
  soc.validate(cfg.params.e_max_kwh);
  if (d.soc_after && !(*d.soc_after >= 0.0 && *d.soc_after <= cfg.params.e_max_kwh)) {
    throw DomainError("--soc-after must lie in [0, e_max]");
  }

  DriverStateStore store;
  if (cfg.driver_state) store = DriverStateStore::load(*cfg.driver_state);
  const DriverState* existing = store.find(d.driver);
  double p1 = 0.0;
  if (d.p1) {
    p1 = *d.p1;
  } else if (existing) {
    p1 = existing->p1;
  } else {
    throw DomainError("no prior for driver '" + d.driver + "': pass --p1 or a driver-state file containing it");
  }
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("p1 must lie in [0,1]");

  const TripLog log = load_gps_csv(d.gps, cfg.months);
  const Season season = resolve_season(o.season, log);
  const PredictorInputs in{log, cfg.params, cfg.consts, season, cfg.mass, cfg.aux};
  const EmpiricalDist xc = predict_xc(in, predictor_options(cfg));
  const Detector detector(xc, cfg.undeclared, cfg.thresholds);
  const DetectorOutput out = detector.detect(soc.x_d(), p1);

  std::optional<double> bonus;
  if (cfg.g_max) bonus = weighted_bonus(out.posterior_h1, *cfg.g_max);
  std::string report = "driver=" + d.driver + "\nseason=" + std::string(to_string(season)) + "\nx_d=" +
                       fmt(soc.x_d()) + "\n" + format_report(out, bonus);

  if (cfg.driver_state) {
    DriverState next;
    next.driver_id = d.driver;
    next.p1 = update_prior(out.posterior_h1, cfg.lambda);
    next.last_certified_soc_kwh = d.soc_after ? *d.soc_after : d.x1;
    next.last_certified_timestamp = log.samples().back().timestamp;
    report += "next_p1=" + fmt(next.p1) + "\n";
    store.upsert(next);
  }
  if (!o.out.empty()) write_file_atomic(output_dir(o) / "detection.txt", report);
  if (cfg.driver_state) store.save(*cfg.driver_state);
  std::cout << report;
  return exit_code(out.decision);
}

struct StudyOptions {
  std::optional<std::size_t> trials;
  std::optional<double> x_u_min;
};

int cmd_study(const CommonOptions& o, const StudyOptions& so) {
  if (o.config.empty()) throw DomainError("study requires --config");
  StudyConfig study = load_study_config(o.config);
  if (o.seed) study.master_seed = *o.seed;
  if (o.samples) study.predictor_samples = *o.samples;
  if (o.bin_width) study.bin_width = *o.bin_width;
  if (o.threads) study.threads = *o.threads;
  if (so.trials) study.trials_per_season = *so.trials;
  if (so.x_u_min) study.undeclared.x_u_min_kwh = *so.x_u_min;
  study.validate();

  const StudyReport report = run_mc_study(study);
  const std::string summary = format_summary(report);
  const fs::path dir = output_dir(o);
  for (const auto& s : report.seasons) {
    const std::string name(to_string(s.season));
    write_file_atomic(dir / ("confusion_" + name + ".csv"), confusion_csv(s));
    write_file_atomic(dir / ("posterior_" + name + "_h0.csv"), posterior_histogram_csv(s, Hypothesis::h0));
    write_file_atomic(dir / ("posterior_" + name + "_h1.csv"), posterior_histogram_csv(s, Hypothesis::h1));
  }
  write_file_atomic(dir / "summary.txt", summary);
  std::cout << summary;
  return 0;
}

int cmd_simulate(const CommonOptions& o) {
  TripGenConfig cfg;
  if (!o.config.empty()) cfg = load_trip_gen_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  if (o.season == "auto") throw DomainError("simulate requires --season summer or --season winter");
  const Season season = parse_season(o.season);
  const TripLog log = generate_trip_log(cfg, season);
  write_file_atomic(output_dir(o) / "gps.csv", to_gps_csv(log));
  std::cout << "season=" << to_string(season) << "\ntrips=" << log.trip_count()
            << "\nduration_s=" << log.total_duration_s() << "\ndistance_km=" << fmt(log.total_distance_m() / 1000.0)
            << '\n';
  return 0;
}

struct SweepOptions {
  std::string gps;
  double x_u = 0.0;
  std::size_t n = 10'000;
  double level = 0.9;
};

int cmd_sweep(const CommonOptions& o, const SweepOptions& so) {
  const AppConfig cfg = resolve_app_config(o);
  const TripLog log = load_gps_csv(so.gps, cfg.months);
  const Season season = resolve_season(o.season, log);
  const PredictorInputs in{log, cfg.params, cfg.consts, season, cfg.mass, cfg.aux};
  const EmpiricalDist xc = predict_xc(in, predictor_options(cfg));
  const Detector detector(xc, cfg.undeclared, cfg.thresholds);
  const std::uint64_t obs_seed = derive_seed(cfg.seed, 0x7377656570ULL, 0);
  const SweepResult sweep = scenario_sweep(detector, in, so.x_u, so.n, obs_seed, cfg.threads);
  const fs::path dir = output_dir(o);
  write_file_atomic(dir / "sweep_curve.csv", sweep_curve_csv(sweep));
  write_file_atomic(dir / "xd_histogram.csv", to_histogram_csv(sweep.xd_histogram));
  std::cout << "season=" << to_string(season) << "\nx_u_kwh=" << fmt(sweep.x_u_kwh) << "\nobservations=" << so.n
            << "\nfraction_posterior_above_" << fmt(so.level) << '=' << fmt(sweep.fraction_posterior_above(so.level))
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Undeclared EV charging detector"};
  app.require_subcommand(1);

  CommonOptions predict_opts;
  auto* predict = app.add_subcommand("predict", "Predict battery energy drawn over a GPS log");
  std::string predict_gps;
  predict->add_option("--gps", predict_gps, "GPS CSV")->required()->check(CLI::ExistingFile);
  add_common(predict, predict_opts);
  add_season(predict, predict_opts);

  CommonOptions detect_opts;
  DetectOptions d;
  auto* detect = app.add_subcommand("detect", "Classify an observed SoC difference");
  detect->add_option("--gps", d.gps, "GPS CSV")->required()->check(CLI::ExistingFile);
  detect->add_option("--x0", d.x0, "SoC at the previous certified charge (kWh)")->required();
  detect->add_option("--x1", d.x1, "SoC at the current certified charge (kWh)")->required();
  detect->add_option("--driver", d.driver, "Driver identifier")->required();
  detect->add_option("--p1", d.p1, "Prior probability of undeclared charging");
  detect->add_option("--lambda", d.lambda, "Prior decay for the next interval");
  detect->add_option("--g-max", d.g_max, "Maximum incentive");
  detect->add_option("--soc-after", d.soc_after, "SoC after the current certified charge (kWh)");
  detect->add_option("--state", d.state, "Driver-state CSV");
  add_common(detect, detect_opts);
  add_season(detect, detect_opts);

  CommonOptions study_opts;
  StudyOptions so;
  auto* study = app.add_subcommand("study", "Run the Monte Carlo detection study");
  study->add_option("--trials", so.trials, "Trials per season")->check(CLI::PositiveNumber);
  study->add_option("--x-u-min", so.x_u_min, "Lower bound of undeclared energy under H1 (kWh)");
  add_common(study, study_opts);

  CommonOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic GPS log");
  add_common(simulate, sim_opts);
  add_season(simulate, sim_opts);

  CommonOptions sweep_opts;
  SweepOptions sw;
  auto* sweep = app.add_subcommand("sweep", "Posterior curve and x_d histogram for a fixed undeclared charge");
  sweep->add_option("--gps", sw.gps, "GPS CSV")->required()->check(CLI::ExistingFile);
  sweep->add_option("--x-u", sw.x_u, "Undeclared energy (kWh)")->required();
  sweep->add_option("--n", sw.n, "Simulated observations")->check(CLI::PositiveNumber);
  sweep->add_option("--level", sw.level, "Posterior level reported")->check(CLI::Range(0.0, 1.0));
  add_common(sweep, sweep_opts);
  add_season(sweep, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (*predict) return cmd_predict(predict_opts, predict_gps);
    if (*detect) return cmd_detect(detect_opts, d);
    if (*study) return cmd_study(study_opts, so);
    if (*simulate) return cmd_simulate(sim_opts);
    if (*sweep) return cmd_sweep(sweep_opts, sw);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
