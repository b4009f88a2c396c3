#include "evdetect/scenario_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "evdetect/config.hpp"
#include "evdetect/parallel.hpp"

namespace evdetect {

namespace {

constexpr std::uint64_t kTripStream = 0x7472697073ULL;
constexpr std::uint64_t kPredictorStream = 0x707265644bULL;
constexpr std::uint64_t kTrialStream = 0x747269616cULL;
constexpr std::size_t kTrialBlock = 64;

double round_to(double x, double step) { return std::round(x / step) * step; }

std::uint64_t season_key(Season s) { return s == Season::summer ? 1 : 2; }

Timestamp default_start(Season season) {
  using namespace std::chrono;
  const year_month_day ymd = season == Season::summer ? 2024y / July / 1d : 2024y / January / 8d;
  return sys_days{ymd} + hours{8};
}

}  // namespace

void TripGenConfig::validate() const {
  if (n_trips < 1) throw DomainError("n_trips must be >= 1");
  if (!(mean_trip_duration_s >= 1.0)) throw DomainError("mean trip duration must be >= 1 s");
  if (!(duration_jitter >= 0.0 && duration_jitter < 1.0)) throw DomainError("duration jitter must lie in [0,1)");
  if (!(cruise_mean_mps > 0.0)) throw DomainError("cruise speed must be > 0");
  if (!(cruise_sd_mps >= 0.0) || !(speed_noise_mps >= 0.0)) throw DomainError("speed spreads must be >= 0");
  if (!(reversion_per_s > 0.0 && reversion_per_s <= 1.0)) throw DomainError("reversion must lie in (0,1]");
  if (!(accel_bound_mps2 > 0.0)) throw DomainError("acceleration bound must be > 0");
  if (!(stop_rate_per_s >= 0.0 && stop_rate_per_s < 1.0)) throw DomainError("stop rate must lie in [0,1)");
  if (!(dwell_mean_s >= 0.0)) throw DomainError("dwell mean must be >= 0");
  if (!(max_grade >= 0.0 && max_grade < 0.5)) throw DomainError("max grade must lie in [0,0.5)");
  if (!(grade_smoothness >= 0.0 && grade_smoothness < 1.0)) throw DomainError("grade smoothness must lie in [0,1)");
  if (!(interval_days > 0.0)) throw DomainError("interval length must be > 0");
}

namespace {

// One trip of `duration` seconds (duration + 1 samples), starting and ending at rest.
std::vector<GpsSample> generate_trip(const TripGenConfig& cfg, int trip_number, Timestamp start, int duration,
                                     double cruise, double& altitude, Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::exponential_distribution<double> dwell_draw(cfg.dwell_mean_s > 0.0 ? 1.0 / cfg.dwell_mean_s : 1.0);
  const double a_max = cfg.accel_bound_mps2;
  const double grade_sd = cfg.max_grade * std::sqrt(1.0 - cfg.grade_smoothness * cfg.grade_smoothness) * 0.5;

  std::vector<GpsSample> out;
  out.reserve(static_cast<std::size_t>(duration) + 1);
  double v = 0.0;
  double grade = 0.0;
  double h = altitude;
  enum class Mode { cruise, braking, dwell } mode = Mode::cruise;
  int dwell_left = 0;
  for (int t = 0; t <= duration; ++t) {
    out.push_back(GpsSample{trip_number, start + std::chrono::seconds{t}, v, round_to(h, 0.01)});
    if (t == duration) break;

    const int remaining = duration - t;  // steps left including this one
    h += grade * v;
    grade = std::clamp(cfg.grade_smoothness * grade + grade_sd * unit(rng), -cfg.max_grade, cfg.max_grade);

    double next = v;
    if (static_cast<double>(remaining) <= v / a_max + 1.0) {
      // Come to rest at the end of the trip.
      next = remaining <= 1 ? 0.0 : std::max(0.0, v - std::max(a_max * 0.5, v / (remaining - 1)));
    } else if (mode == Mode::dwell) {
      next = 0.0;
      if (--dwell_left <= 0) mode = Mode::cruise;
    } else if (mode == Mode::braking) {
      next = std::max(0.0, v - a_max);
      if (next == 0.0) {
        dwell_left = static_cast<int>(std::round(dwell_draw(rng)));
        mode = dwell_left > 0 ? Mode::dwell : Mode::cruise;
      }
    } else {
      const double dv = cfg.reversion_per_s * (cruise - v) + cfg.speed_noise_mps * unit(rng);
      next = std::max(0.0, v + std::clamp(dv, -a_max, a_max));
      if (v > 0.0 && uniform(rng) < cfg.stop_rate_per_s) mode = Mode::braking;
    }
    v = round_to(next, 0.01);
  }
  altitude = out.back().altitude_m;
  return out;
}

}  // namespace

TripLog generate_trip_log(const TripGenConfig& cfg, Season season, Rng& rng) {
  cfg.validate();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> unit(0.0, 1.0);

  const Timestamp start = cfg.start.value_or(default_start(season));
  const double spacing_s = cfg.interval_days * 86400.0 / cfg.n_trips;
  const double nominal_m = cfg.cruise_mean_mps * cfg.mean_trip_duration_s;

  std::vector<GpsSample> samples;
  double altitude = cfg.start_altitude_m;
  Timestamp earliest = start;
  for (int trip = 1; trip <= cfg.n_trips; ++trip) {
    const auto offset = std::chrono::seconds{static_cast<std::int64_t>(
        std::floor((trip - 1) * spacing_s + uniform(rng) * std::min(3600.0, 0.25 * spacing_s)))};
    const Timestamp trip_start = std::max(start + offset, earliest);

    std::vector<GpsSample> trip_samples;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 100) {
        throw DomainError("trip generator cannot meet the +-50% distance bound with this configuration");
      }
      const double jitter = cfg.duration_jitter * (2.0 * uniform(rng) - 1.0);
      const int duration = std::max(1, static_cast<int>(std::lround(cfg.mean_trip_duration_s * (1.0 + jitter))));
      const double cruise = std::clamp(cfg.cruise_mean_mps + cfg.cruise_sd_mps * unit(rng),
                                       0.75 * cfg.cruise_mean_mps, 1.25 * cfg.cruise_mean_mps);
      double h = altitude;
      trip_samples = generate_trip(cfg, trip, trip_start, duration, cruise, h, rng);
      double dist = 0.0;
      for (std::size_t i = 0; i + 1 < trip_samples.size(); ++i) dist += trip_samples[i].speed_mps;
      // Very short trips cannot reach cruise speed; only bound trips long enough to do so.
      const bool short_trip = cfg.mean_trip_duration_s < 4.0 * cfg.cruise_mean_mps / cfg.accel_bound_mps2;
      if (short_trip || std::abs(dist - nominal_m) <= 0.5 * nominal_m) {
        altitude = h;
        break;
      }
    }
    earliest = trip_samples.back().timestamp + std::chrono::seconds{1};
    samples.insert(samples.end(), trip_samples.begin(), trip_samples.end());
  }
  return TripLog(std::move(samples), season);
}

TripLog generate_trip_log(const TripGenConfig& cfg, Season season) {
  Rng rng = make_rng(cfg.seed, kTripStream, 0);
  return generate_trip_log(cfg, season, rng);
}

void DriverScenario::validate(const UndeclaredModel& undeclared) const {
  if (truth == Hypothesis::h0 && x_u_kwh != 0.0) throw DomainError("H0 scenario must have x_u = 0");
  if (truth == Hypothesis::h1 && !(x_u_kwh > undeclared.x_u_min_kwh && x_u_kwh <= undeclared.x_u_max_kwh)) {
    throw DomainError("H1 scenario must have x_u in (x_u_min, x_u_max]");
  }
  if (!(m_peop_kg >= 0.0) || !(w_aux_w >= 0.0)) throw DomainError("scenario mass and power must be >= 0");
}

Observation simulate_observation(const DriverScenario& scenario, const TripLog& log, const EvParams& params,
                                 const PhysicsConstants& consts) {
  if (!(scenario.x_u_kwh >= 0.0)) throw DomainError("undeclared energy must be >= 0");
  if (scenario.truth == Hypothesis::h0 && scenario.x_u_kwh != 0.0) {
    throw DomainError("H0 scenario must have x_u = 0");
  }
  Observation obs;
  obs.x_c_kwh = cumulative_draw(log, scenario.m_peop_kg, scenario.w_aux_w, params, consts);
  obs.x_u_kwh = scenario.x_u_kwh;
  obs.x_d_kwh = obs.x_c_kwh - obs.x_u_kwh;
  const double cap = params.e_max_kwh;
  obs.feasible = std::abs(obs.x_d_kwh) <= cap;
  if (obs.x_d_kwh >= 0.0) {
    obs.soc.x0 = cap;
    obs.soc.x1 = cap - obs.x_d_kwh;
  } else {
    obs.soc.x1 = cap;
    obs.soc.x0 = cap + obs.x_d_kwh;
  }
  return obs;
}

namespace {
std::size_t row(Hypothesis h) { return h == Hypothesis::h0 ? 0 : 1; }
std::size_t col(Decision d) { return d == Decision::h0 ? 0 : d == Decision::h1 ? 1 : 2; }
}  // namespace

void ConfusionMatrix::add(Hypothesis truth, Decision decided) { ++counts[row(truth)][col(decided)]; }

std::size_t ConfusionMatrix::at(Hypothesis truth, Decision decided) const { return counts[row(truth)][col(decided)]; }

std::size_t ConfusionMatrix::row_total(Hypothesis truth) const {
  const auto& r = counts[row(truth)];
  return r[0] + r[1] + r[2];
}

double ConfusionMatrix::sensitivity() const {
  const double tp = static_cast<double>(at(Hypothesis::h1, Decision::h1));
  const double fn = static_cast<double>(at(Hypothesis::h1, Decision::h0));
  return tp + fn > 0 ? tp / (tp + fn) : std::numeric_limits<double>::quiet_NaN();
}

double ConfusionMatrix::specificity() const {
  const double tn = static_cast<double>(at(Hypothesis::h0, Decision::h0));
  const double fp = static_cast<double>(at(Hypothesis::h0, Decision::h1));
  return tn + fp > 0 ? tn / (tn + fp) : std::numeric_limits<double>::quiet_NaN();
}

double ConfusionMatrix::erasure_rate(Hypothesis truth) const {
  const auto total = row_total(truth);
  return total ? static_cast<double>(at(truth, Decision::erasure)) / static_cast<double>(total)
               : std::numeric_limits<double>::quiet_NaN();
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) counts[r][c] += other.counts[r][c];
  }
  return *this;
}

void StudyConfig::validate() const {
  params.validate();
  mass.validate();
  aux.validate();
  undeclared.validate(params.e_max_kwh);
  thresholds.validate();
  trips.validate();
  if (!(p1_sim >= 0.0 && p1_sim <= 1.0)) throw DomainError("p1_sim must lie in [0,1]");
  if (trials_per_season == 0) throw DomainError("trials_per_season must be >= 1");
  if (predictor_samples == 0) throw DomainError("predictor samples must be >= 1");
  if (!(bin_width > 0.0)) throw DomainError("bin width must be > 0");
  if (!(mass_scale > 0.0) || !(power_scale > 0.0)) throw DomainError("misspecification scales must be > 0");
  if (posterior_bins == 0) throw DomainError("posterior_bins must be >= 1");
  if (seasons.empty()) throw DomainError("study needs at least one season");
  slab_grid(undeclared, bin_width);
}

double SeasonReport::posterior_quantile(Hypothesis truth, double q) const {
  auto v = posteriors[row(truth)];
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) ;
  return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

double SeasonReport::mean_posterior(Hypothesis truth) const {
  const auto& v = posteriors[row(truth)];
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (const double p : v) s += p;
  return s / static_cast<double>(v.size());
}

const SeasonReport& StudyReport::for_season(Season s) const {
  for (const auto& r : seasons) {
    if (r.season == s) return r;
  }
  throw DomainError("season not in study report");
}

TripLog study_trip_log(const StudyConfig& study, Season season) {
  // Same random stream in every season, so the route profile is shared and only the
  // calendar dates differ.
  Rng rng = make_rng(study.master_seed, kTripStream, 0);
  return generate_trip_log(study.trips, season, rng);
}

EmpiricalDist study_predictor(const StudyConfig& study, const TripLog& log) {
  PredictorInputs in{log, study.params, study.consts, log.season(), study.mass, study.aux};
  PredictorOptions opt;
  opt.samples = study.predictor_samples;
  opt.bin_width = study.bin_width;
  opt.seed = derive_seed(study.master_seed, kPredictorStream, season_key(log.season()));
  opt.threads = study.threads;
  return predict_xc(in, opt);
}

namespace {

struct TrialResult {
  Hypothesis truth = Hypothesis::h0;
  bool classified = false;
  double posterior = 0.0;
  Decision decision = Decision::h0;
};

SeasonReport run_season(const StudyConfig& study, Season season) {
  const TripLog log = study_trip_log(study, season);
  const Detector detector(study_predictor(study, log), study.undeclared, study.thresholds);

  std::vector<TrialResult> results(study.trials_per_season);
  const std::size_t blocks = (results.size() + kTrialBlock - 1) / kTrialBlock;
  const std::uint64_t stream = kTrialStream ^ (season_key(season) << 40);
  parallel_for(blocks, study.threads, [&](std::size_t b) {
    const std::size_t end = std::min(results.size(), (b + 1) * kTrialBlock);
    for (std::size_t t = b * kTrialBlock; t < end; ++t) {
      Rng rng = make_rng(study.master_seed, stream, t);
      DriverScenario scenario;
      scenario.season = season;
      scenario.truth = sample_hypothesis(study.p1_sim, rng);
      scenario.x_u_kwh = sample_undeclared(study.undeclared, scenario.truth, rng);
      scenario.m_peop_kg = sample_mass(study.mass, rng) * study.mass_scale;
      scenario.w_aux_w = sample_aux_power(study.aux, season, rng) * study.power_scale;
      const Observation obs = simulate_observation(scenario, log, study.params, study.consts);

      TrialResult& r = results[t];
      r.truth = scenario.truth;
      if (!obs.feasible && study.exclude_infeasible) continue;
      const DetectorOutput out = detector.detect(obs.x_d_kwh);
      r.classified = true;
      r.posterior = out.posterior_h1;
      r.decision = out.decision;
    }
  });

  SeasonReport rep;
  rep.season = season;
  rep.trip_count = log.trip_count();
  rep.duration_s = log.total_duration_s();
  rep.distance_km = log.total_distance_m() / 1000.0;
  rep.xc_stats = dist_stats(detector.xc());
  for (auto& h : rep.posterior_histogram) h.assign(study.posterior_bins, 0);
  for (const auto& r : results) {
    const std::size_t k = row(r.truth);
    ++rep.trials[k];
    if (!r.classified) {
      ++rep.infeasible[k];
      continue;
    }
    rep.confusion.add(r.truth, r.decision);
    rep.posteriors[k].push_back(r.posterior);
    const auto bin = std::min(study.posterior_bins - 1,
                              static_cast<std::size_t>(r.posterior * static_cast<double>(study.posterior_bins)));
    ++rep.posterior_histogram[k][bin];
  }
  return rep;
}

std::string pct(double x) {
  if (std::isnan(x)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x);
  return buf;
}

}  // namespace

StudyReport run_mc_study(const StudyConfig& study) {
  study.validate();
  StudyReport report;
  for (const Season season : study.seasons) report.seasons.push_back(run_season(study, season));
  return report;
}

std::string format_summary(const StudyReport& report) {
  std::ostringstream s;
  for (const auto& r : report.seasons) {
    char line[256];
    s << "season: " << to_string(r.season) << '\n';
    std::snprintf(line, sizeof line, "  interval: %zu trips, %.1f km, %lld s\n", r.trip_count, r.distance_km,
                  static_cast<long long>(r.duration_s));
    s << line;
    std::snprintf(line, sizeof line,
                  "  x_C predictor: mean %.3f kWh, sd %.3f kWh, mode %.3f kWh, support [%.2f, %.2f] kWh\n",
                  r.xc_stats.mean, std::sqrt(r.xc_stats.variance), r.xc_stats.mode_center, r.xc_stats.support_low,
                  r.xc_stats.support_high);
    s << line;
    for (const Hypothesis h : {Hypothesis::h0, Hypothesis::h1}) {
      std::snprintf(line, sizeof line,
                    "  truth %s: %zu trials, %zu infeasible, decided H0 %zu, H1 %zu, E %zu (erasure %s)\n",
                    std::string(to_string(h)).c_str(), r.trials[row(h)], r.infeasible[row(h)],
                    r.confusion.at(h, Decision::h0), r.confusion.at(h, Decision::h1),
                    r.confusion.at(h, Decision::erasure), pct(r.confusion.erasure_rate(h)).c_str());
      s << line;
    }
    s << "  sensitivity: " << pct(r.sensitivity()) << '\n';
    s << "  specificity: " << pct(r.specificity()) << '\n';
  }
  return s.str();
}

std::string confusion_csv(const SeasonReport& season) {
  std::ostringstream s;
  s << "truth,decided_h0,decided_h1,decided_e\n";
  for (const Hypothesis h : {Hypothesis::h0, Hypothesis::h1}) {
    s << to_string(h) << ',' << season.confusion.at(h, Decision::h0) << ','
      << season.confusion.at(h, Decision::h1) << ',' << season.confusion.at(h, Decision::erasure) << '\n';
  }
  return s.str();
}

std::string posterior_histogram_csv(const SeasonReport& season, Hypothesis truth) {
  std::ostringstream s;
  s << "posterior_left,posterior_right,count\n";
  const auto& h = season.posterior_histogram[row(truth)];
  const double w = 1.0 / static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    s << format_double(static_cast<double>(i) * w) << ',' << format_double(static_cast<double>(i + 1) * w) << ','
      << h[i] << '\n';
  }
  return s.str();
}

double SweepResult::fraction_posterior_above(double level) const {
  if (posteriors.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto n = std::count_if(posteriors.begin(), posteriors.end(), [level](double p) { return p > level; });
  return static_cast<double>(n) / static_cast<double>(posteriors.size());
}

SweepResult scenario_sweep(const Detector& detector, const PredictorInputs& inputs, double x_u_kwh, std::size_t n,
                           std::uint64_t seed, unsigned threads) {
  if (n == 0) throw DomainError("scenario_sweep: need at least one observation");
  if (!(x_u_kwh >= 0.0)) throw DomainError("scenario_sweep: x_u must be >= 0");
  const double w = detector.xc().bin_width;
  const double shift_r = x_u_kwh / w;
  const auto shift = static_cast<std::int64_t>(std::llround(shift_r));
  if (std::abs(shift_r - static_cast<double>(shift)) > 1e-6) {
    throw DomainError("scenario_sweep: x_u must be a whole number of bins");
  }

  SweepResult res;
  res.x_u_kwh = x_u_kwh;
  for (auto j = detector.support_min_bin(); j <= detector.support_max_bin(); ++j) {
    res.curve.push_back(SweepPoint{j, static_cast<double>(j) * w, static_cast<double>(j + 1) * w,
                                   detector.detect_bin(j)});
  }

  PredictorOptions opt;
  opt.samples = n;
  opt.bin_width = w;
  opt.seed = seed;
  opt.threads = threads;
  const auto xc_true = sample_xc(inputs, opt);
  EmpiricalDist hist = bin_samples(xc_true, w);
  hist.first_bin -= shift;
  res.xd_histogram = std::move(hist);
  res.posteriors.reserve(n);
  for (const double x : xc_true) {
    res.posteriors.push_back(detector.detect_bin(bin_index(x, w) - shift).posterior_h1);
  }
  return res;
}

std::string sweep_curve_csv(const SweepResult& sweep) {
  std::ostringstream s;
  s << "xd_bin_left_kwh,xd_bin_right_kwh,posterior_h1,f_h0,f_h1\n";
  for (const auto& p : sweep.curve) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%#.15g,%#.15g,%#.15g\n", p.x_d_left, p.x_d_right,
                  p.out.posterior_h1, p.out.f_h0_at_xd, p.out.f_h1_at_xd);
    s << buf;
  }
  return s.str();
}

}  // namespace evdetect
