#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evdetect/detector.hpp"
#include "evdetect/ev_physics.hpp"
#include "evdetect/predictor.hpp"
#include "evdetect/stochastic_models.hpp"
#include "evdetect/trip_log.hpp"

namespace evdetect {

/// Synthetic trip generator: a clamped mean-reverting random walk on speed with
/// Poisson stop events, and an AR(1) bounded-grade altitude walk.
struct TripGenConfig {
  int n_trips = 40;
  double mean_trip_duration_s = 560.0;
  double duration_jitter = 0.2;  ///< trip duration uniform in mean * [1 - j, 1 + j]
  double cruise_mean_mps = 16.0;
  double cruise_sd_mps = 1.5;    ///< per-trip cruise target spread, clamped to +-25 %
  double speed_noise_mps = 0.4;  ///< per-second speed innovation
  double reversion_per_s = 0.1;  ///< pull toward the cruise target
  double accel_bound_mps2 = 1.5;
  double stop_rate_per_s = 1.0 / 240.0;
  double dwell_mean_s = 20.0;
  double max_grade = 0.04;
  double grade_smoothness = 0.98;  ///< AR(1) coefficient of the road grade
  double start_altitude_m = 20.0;
  double interval_days = 14.0;
  std::uint64_t seed = 1;
  /// First trip start; defaults to 2024-07-01 (summer) or 2024-01-08 (winter).
  std::optional<Timestamp> start;

  void validate() const;
};

/// Log passing every TripLog invariant; each trip ends at rest and its distance lies
/// within +-50 % of cruise_mean * mean_trip_duration.
TripLog generate_trip_log(const TripGenConfig& cfg, Season season, Rng& rng);
/// Same, seeded from cfg.seed.
TripLog generate_trip_log(const TripGenConfig& cfg, Season season);

/// Ground truth of one simulated certified interval.
struct DriverScenario {
  Hypothesis truth = Hypothesis::h0;
  double x_u_kwh = 0.0;
  double m_peop_kg = 0.0;
  double w_aux_w = 0.0;
  Season season = Season::summer;

  /// H0 requires x_u = 0; H1 requires x_u in (x_u_min, x_u_max].
  void validate(const UndeclaredModel& undeclared) const;
};

struct Observation {
  double x_c_kwh = 0.0;
  double x_u_kwh = 0.0;
  double x_d_kwh = 0.0;
  SocPair soc;
  /// False when no x0, x1 in [0, e_max] realise x_d.
  bool feasible = true;
};

/// True x_C from the physics model, x_d = x_C - x_U, and an SoC pair realising it
/// (x0 = e_max when x_d >= 0, otherwise x1 = e_max).
Observation simulate_observation(const DriverScenario& scenario, const TripLog& log, const EvParams& params,
                                 const PhysicsConstants& consts = {});

/// 2x3 tallies, rows = truth (H0, H1), columns = decision (H0, H1, E).
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 3>, 2> counts{};

  void add(Hypothesis truth, Decision decided);
  std::size_t at(Hypothesis truth, Decision decided) const;
  std::size_t row_total(Hypothesis truth) const;
  /// TP / (TP + FN) over non-erased H1 trials; NaN when there are none.
  double sensitivity() const;
  /// TN / (TN + FP) over non-erased H0 trials; NaN when there are none.
  double specificity() const;
  double erasure_rate(Hypothesis truth) const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

struct StudyConfig {
  EvParams params;
  PhysicsConstants consts;
  MassModel mass;
  AuxPowerModel aux;
  /// Slab range used both to simulate H1 drivers and as the detector prior;
  /// `p1` is the prior handed to the detector.
  UndeclaredModel undeclared{0.5, 0.0, 35.0};
  double p1_sim = 0.5;
  std::size_t trials_per_season = 10'000;
  std::vector<Season> seasons{Season::summer, Season::winter};
  TripGenConfig trips;
  std::size_t predictor_samples = 10'000;
  double bin_width = 0.1;
  Thresholds thresholds;
  std::uint64_t master_seed = 2024;
  /// Misspecification knobs: true mass / power draws are multiplied by these.
  double mass_scale = 1.0;
  double power_scale = 1.0;
  bool exclude_infeasible = true;
  std::size_t posterior_bins = 20;
  unsigned threads = 1;

  void validate() const;
};

struct SeasonReport {
  Season season = Season::summer;
  std::size_t trip_count = 0;
  std::int64_t duration_s = 0;
  double distance_km = 0.0;
  DistStats xc_stats;
  ConfusionMatrix confusion;
  std::array<std::size_t, 2> trials{};      ///< all trials per truth (H0, H1)
  std::array<std::size_t, 2> infeasible{};  ///< excluded SoC-infeasible trials per truth
  std::array<std::vector<double>, 2> posteriors;  ///< posteriors of classified trials per truth
  std::array<std::vector<std::size_t>, 2> posterior_histogram;

  double sensitivity() const { return confusion.sensitivity(); }
  double specificity() const { return confusion.specificity(); }
  /// Empirical q-quantile of the classified posteriors for a truth class.
  double posterior_quantile(Hypothesis truth, double q) const;
  double mean_posterior(Hypothesis truth) const;
};

struct StudyReport {
  std::vector<SeasonReport> seasons;
  const SeasonReport& for_season(Season s) const;
};

StudyReport run_mc_study(const StudyConfig& study);

/// Trip log the study uses for a season (deterministic in the master seed).
TripLog study_trip_log(const StudyConfig& study, Season season);
/// The study's x_C predictor for a season.
EmpiricalDist study_predictor(const StudyConfig& study, const TripLog& log);

std::string format_summary(const StudyReport& report);
/// `truth,decided_h0,decided_h1,decided_e`
std::string confusion_csv(const SeasonReport& season);
/// `posterior_left,posterior_right,count`
std::string posterior_histogram_csv(const SeasonReport& season, Hypothesis truth);

struct SweepPoint {
  std::int64_t bin = 0;
  double x_d_left = 0.0;
  double x_d_right = 0.0;
  DetectorOutput out;
};

struct SweepResult {
  double x_u_kwh = 0.0;
  std::vector<SweepPoint> curve;      ///< posterior over every bin of the x_D support
  EmpiricalDist xd_histogram;         ///< empirical x_d | x_u
  std::vector<double> posteriors;     ///< posterior of each simulated observation
  double fraction_posterior_above(double level) const;
};

/// Fixed-x_U scenario: posterior curve over the x_D grid plus n simulated observations
/// x_d = x_C - x_u, with x_C drawn from the predictor's own priors under `seed`.
/// x_u must be a whole number of bins; observation bins are bin(x_C) - x_u / bin_width.
SweepResult scenario_sweep(const Detector& detector, const PredictorInputs& inputs, double x_u_kwh, std::size_t n,
                           std::uint64_t seed, unsigned threads = 1);

/// `xd_bin_left_kwh,xd_bin_right_kwh,posterior_h1,f_h0,f_h1`
std::string sweep_curve_csv(const SweepResult& sweep);

}  // namespace evdetect
