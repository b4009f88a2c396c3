#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "evdetect/detector.hpp"
#include "evdetect/ev_physics.hpp"
#include "evdetect/predictor.hpp"
#include "evdetect/scenario_sim.hpp"
#include "evdetect/stochastic_models.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace evdetect;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  std::printf("[%s] %s %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void physics_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> m(0, 400), w(0, 5000);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto log = testing::random_log(rng, 1, 101);
    const double mp = m(rng), ww = w(rng);
    const double expect = oracle::naive_cumulative_kwh(testing::to_oracle(log), mp, ww, {});
    const double got = cumulative_draw(log, mp, ww, EvParams{});
    worst = std::max(worst, std::abs(got - expect) / std::max(std::abs(expect), 1e-300));
  }
  const double dt = seconds_since(t0);
  report("1 physics oracle", worst <= 1e-9 && dt < 5.0,
         fmt("1000 logs of 100 steps, max rel err %.3g (<= 1e-9), %.2f s (< 5 s)", worst, dt));
}

void prior_constants() {
  const MassModel mass;
  const std::array<double, 5> table{0.61, 0.23, 0.11, 0.04, 0.01};
  const bool pmf_ok = mass.occupancy_pmf == table && std::abs(mass.expected_occupancy() - 1.61) <= 1e-9;
  bool valid = true;
  try {
    mass.validate();
  } catch (const std::exception&) {
    valid = false;
  }

  const AuxPowerModel aux;
  Rng rng = make_rng(7, 1, 0);
  double sw = 0, ss = 0;
  for (int i = 0; i < 1'000'000; ++i) sw += sample_aux_power(aux, Season::winter, rng);
  for (int i = 0; i < 1'000'000; ++i) ss += sample_aux_power(aux, Season::summer, rng);
  const double mw = sw / 1e6, ms = ss / 1e6;
  const bool means_ok = std::abs(mw - 2400) <= 0.005 * 2400 && std::abs(ms - 800) <= 0.005 * 800;

  const auto gw = gamma_from_moments(2400, 1.92e6);
  const auto gs = gamma_from_moments(800, 3.2e5);
  bool round_trip = gw.mean() == 2400 && gw.variance() == 1.92e6 && gs.mean() == 800 && gs.variance() == 3.2e5 &&
                    gw.shape == 3 && gw.scale == 800 && gs.shape == 2 && gs.scale == 400;
  std::mt19937_64 r(5);
  std::uniform_real_distribution<double> u(1, 1e4);
  double worst = 0;
  for (int i = 0; i < 100'000; ++i) {
    const double mean = u(r), var = u(r) * u(r);
    const auto g = gamma_from_moments(mean, var);
    worst = std::max({worst, std::abs(g.mean() - mean) / mean, std::abs(g.variance() - var) / var});
  }
  round_trip = round_trip && worst <= 4 * std::numeric_limits<double>::epsilon();

  report("2 prior constants", pmf_ok && valid && means_ok && round_trip,
         fmt("pmf matches table, E[N]=%.12g; gamma means %.1f W (2400 +-0.5%%), %.2f W (800 +-0.5%%); "
             "moment round trip exact on table rows, random max rel err %.2g",
             mass.expected_occupancy(), mw, ms, worst));
}

void correlation_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  double worst_h1 = 0, worst_post = 0;
  bool support_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const auto bins = oracle::random_bins(rng, 30);
    const std::int64_t lo = trial % 4;
    const std::int64_t hi = lo + 1 + static_cast<std::int64_t>(rng() % 15);
    const double p1 = static_cast<double>(rng() % 1001) / 1000.0;
    const UndeclaredModel u{p1, lo * 0.1, hi * 0.1};
    const auto xc = testing::to_dist(bins);

    const auto expect = oracle::brute_h1(bins, lo, hi);
    const auto got = xd_dist_h1(xc, u);
    support_ok = support_ok && got.first_bin == expect.begin()->first && got.last_bin() == expect.rbegin()->first;
    for (const auto& [j, mj] : expect) worst_h1 = std::max(worst_h1, std::abs(got.mass_at(j) - mj));

    for (auto j = xc.first_bin - hi - 2; j <= xc.last_bin() + 2; ++j) {
      const double x_d = (static_cast<double>(j) + 0.5) * 0.1;
      const auto out = posterior_h1(xc, u, x_d);
      worst_post = std::max(worst_post, std::abs(out.posterior_h1 - oracle::brute_posterior(bins, lo, hi, p1, j)));
    }
  }
  const double dt = seconds_since(t0);
  report("3 discrete correlation oracle", support_ok && worst_h1 <= 1e-12 && worst_post <= 1e-12 && dt < 10.0,
         fmt("100 fixtures <= 30 bins, max |dH1| %.2g, max |dposterior| %.2g (<= 1e-12), %.2f s (< 10 s)", worst_h1,
             worst_post, dt));
}

void support_bounds() {
  std::mt19937_64 rng(303);
  int checked = 0;
  bool ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const auto bins = oracle::random_bins(rng, 30);
    const std::int64_t hi = 1 + static_cast<std::int64_t>(rng() % 40);
    const UndeclaredModel u{0.5, 0.0, hi * 0.1};
    const auto xc = testing::to_dist(bins);
    const auto mix = xd_mixture(xc, u);
    const Detector det(xc, u);
    // (min x_C - x_u_max, max x_C] on the grid: bins min_bin - hi .. max_bin.
    ok = ok && mix.first_bin == xc.first_bin - hi && mix.last_bin() == xc.last_bin() && mix.masses.front() > 0 &&
         mix.masses.back() > 0 && det.support_min_bin() == mix.first_bin && det.support_max_bin() == mix.last_bin() &&
         det.detect_bin(mix.first_bin - 1).support == SupportFlag::below_both_supports &&
         det.detect_bin(mix.last_bin() + 1).support == SupportFlag::above_both_supports &&
         det.detect_bin(mix.first_bin).support == SupportFlag::in_support &&
         det.detect_bin(mix.last_bin()).support == SupportFlag::in_support;
    ++checked;
  }
  report("4 support bounds", ok, fmt("%d fixtures, x_D support == [min_bin - slab_bins, max_bin] bin-exact", checked));
}

void ternary() {
  const bool ok = ternary_decision(0.0) == Decision::h0 && ternary_decision(0.4) == Decision::h0 &&
                  ternary_decision(std::nextafter(0.4, 1.0)) == Decision::erasure &&
                  ternary_decision(0.5) == Decision::erasure && ternary_decision(0.6) == Decision::erasure &&
                  ternary_decision(std::nextafter(0.6, 1.0)) == Decision::h1 && ternary_decision(1.0) == Decision::h1;
  bool throws = false;
  try {
    ternary_decision(1.0000001);
  } catch (const DomainError&) {
    throws = true;
  }
  report("5 ternary thresholds", ok && throws, "0.4 -> H0, 0.4+ulp -> E, 0.6 -> E, 0.6+ulp -> H1, 1 -> H1, >1 rejected");
}

struct StudyRuns {
  StudyReport full;
  StudyReport narrow;
  double full_seconds = 0;
};

std::string pct(double v) { return fmt("%.2f%%", 100 * v); }

StudyRuns scenario_reproduction(const StudyConfig& base) {
  StudyRuns runs;
  auto t0 = Clock::now();
  runs.full = run_mc_study(base);
  runs.full_seconds = seconds_since(t0);
  StudyConfig narrow = base;
  narrow.undeclared.x_u_min_kwh = 0.2 * base.params.e_max_kwh;
  runs.narrow = run_mc_study(narrow);

  const auto& s = runs.full.for_season(Season::summer);
  const auto& w = runs.full.for_season(Season::winter);
  const auto& sn = runs.narrow.for_season(Season::summer);
  const auto& wn = runs.narrow.for_season(Season::winter);
  for (const auto* r : {&s, &w}) {
    std::printf("     %s: %zu trips, %.1f km, %lld s; H0 %zu trials (%zu SoC-infeasible excluded), H1 %zu (%zu excluded); "
                "erasure H0 %s, H1 %s\n",
                std::string(to_string(r->season)).c_str(), r->trip_count, r->distance_km,
                static_cast<long long>(r->duration_s), r->trials[0], r->infeasible[0], r->trials[1], r->infeasible[1],
                pct(r->confusion.erasure_rate(Hypothesis::h0)).c_str(),
                pct(r->confusion.erasure_rate(Hypothesis::h1)).c_str());
  }
  report("6a summer specificity", s.specificity() >= 0.97, pct(s.specificity()) + " (>= 97%)");
  report("6b winter specificity", w.specificity() >= 0.97, pct(w.specificity()) + " (>= 97%)");
  report("6c summer sensitivity", std::abs(s.sensitivity() - 0.89) <= 0.10, pct(s.sensitivity()) + " (89% +- 10 pts)");
  report("6d winter sensitivity", std::abs(w.sensitivity() - 0.858) <= 0.10,
         pct(w.sensitivity()) + " (85.8% +- 10 pts)");
  report("6e narrower undeclared range raises sensitivity",
         sn.sensitivity() > s.sensitivity() && wn.sensitivity() > w.sensitivity(),
         "summer " + pct(s.sensitivity()) + " -> " + pct(sn.sensitivity()) + ", winter " + pct(w.sensitivity()) +
             " -> " + pct(wn.sensitivity()));
  report("6f study runtime", runs.full_seconds < 120.0,
         fmt("%.1f s for 2 x %zu trials, single-threaded (< 120 s)", runs.full_seconds, base.trials_per_season));
  return runs;
}

void fixed_charge_scenarios(const StudyConfig& base) {
  for (const Season season : {Season::summer, Season::winter}) {
    const TripLog log = study_trip_log(base, season);
    const PredictorInputs in{log, base.params, base.consts, season, base.mass, base.aux};
    const EmpiricalDist xc = study_predictor(base, log);
    const Detector det(xc, base.undeclared, base.thresholds);
    const std::uint64_t seed = derive_seed(base.master_seed, 0x616363ULL, season == Season::winter);
    const auto half = scenario_sweep(det, in, 0.5 * base.params.e_max_kwh, 10'000, seed);
    const double frac = half.fraction_posterior_above(0.9);
    report(std::string("7 fixed x_U = E_max/2, ") + std::string(to_string(season)), frac >= 0.99,
           fmt("%.2f%% of 10000 observations with posterior > 0.9 (>= 99%%)", 100 * frac));

    const auto zero = scenario_sweep(det, in, 0.0, 10'000, seed + 1);
    const double tv_fine = total_variation(zero.xd_histogram, xc);
    const double tv = total_variation(rebin(zero.xd_histogram, 10), rebin(xc, 10));
    report(std::string("8 x_U = 0 histogram vs predictor, ") + std::string(to_string(season)), tv < 0.05,
           fmt("TV %.4f on 1 kWh bins (< 0.05); %.4f on the 0.1 kWh grid", tv, tv_fine));
  }
}

void seasonal_ordering(const StudyConfig& base, const StudyRuns& runs) {
  const TripLog log = study_trip_log(base, Season::summer);
  PredictorOptions po;
  po.samples = base.predictor_samples;
  po.bin_width = base.bin_width;
  po.seed = base.master_seed;
  const auto vs = dist_stats(predict_xc({log, base.params, base.consts, Season::summer, base.mass, base.aux}, po));
  const auto vw = dist_stats(predict_xc({log, base.params, base.consts, Season::winter, base.mass, base.aux}, po));
  report("9a winter predictor variance exceeds summer", vw.variance > vs.variance,
         fmt("%.3f vs %.3f kWh^2 on the same log", vw.variance, vs.variance));
  const double qs = runs.full.for_season(Season::summer).posterior_quantile(Hypothesis::h0, 0.95);
  const double qw = runs.full.for_season(Season::winter).posterior_quantile(Hypothesis::h0, 0.95);
  report("9b winter H0 posterior 95th percentile exceeds summer", qw > qs, fmt("%.4f vs %.4f", qw, qs));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
  std::size_t nb = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++nb;
  if (names.empty() || names.size() != nb) return false;
  for (const auto& n : names) {
    if (slurp(a / n) != slurp(b / n)) return false;
  }
  return true;
}

int cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(EVDETECT_CLI) + " " + args + " > " + (out / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(const StudyConfig& base, const StudyRuns& runs) {
  std::vector<std::string> broken;

  StudyConfig threaded = base;
  threaded.threads = 4;
  const auto again = run_mc_study(threaded);
  for (const auto& s : runs.full.seasons) {
    const auto& t = again.for_season(s.season);
    if (confusion_csv(s) != confusion_csv(t) || s.posteriors != t.posteriors ||
        posterior_histogram_csv(s, Hypothesis::h0) != posterior_histogram_csv(t, Hypothesis::h0) ||
        posterior_histogram_csv(s, Hypothesis::h1) != posterior_histogram_csv(t, Hypothesis::h1)) {
      broken.push_back("study");
    }
  }
  if (format_summary(runs.full) != format_summary(again)) broken.push_back("study summary");

  const TripLog log = study_trip_log(base, Season::winter);
  const PredictorInputs in{log, base.params, base.consts, Season::winter, base.mass, base.aux};
  PredictorOptions po;
  po.seed = 11;
  const auto p1 = predict_xc(in, po);
  po.threads = 4;
  const auto p4 = predict_xc(in, po);
  if (to_histogram_csv(p1) != to_histogram_csv(p4) || sample_xc(in, po) != sample_xc(in, {10'000, 0.1, 11, 1})) {
    broken.push_back("predictor");
  }

  const fs::path work = fs::temp_directory_path() / "evdetect_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  {
    std::ofstream(work / "study.conf") << "trials_per_season = 500\nsamples = 2000\nn_trips = 10\n";
  }
  const std::string conf = "--config " EVDETECT_DATA_DIR "/default.conf";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate --season winter --seed 5"},
      {"predict", "predict --gps " + (work / "simulate_1" / "gps.csv").string() + " " + conf},
      {"detect", "detect --gps " + (work / "simulate_1" / "gps.csv").string() + " " + conf +
                     " --driver a --p1 0.5 --x0 30 --x1 12"},
      {"sweep", "sweep --gps " + (work / "simulate_1" / "gps.csv").string() + " " + conf + " --x-u 10 --n 2000"},
      {"study", "study --config " + (work / "study.conf").string()},
  };
  for (const auto& [name, args] : commands) {
    int codes[2];
    int k = 0;
    for (const unsigned threads : {1u, 4u}) {
      const fs::path out = work / (name + "_" + std::to_string(threads));
      fs::create_directories(out);
      const std::string thread_flag = name == "simulate" ? "" : " --threads " + std::to_string(threads);
      codes[k++] = cli(args + thread_flag + " --out " + out.string(), out);
    }
    if (codes[0] != codes[1] || codes[0] == 1 || !same_tree(work / (name + "_1"), work / (name + "_4"))) {
      broken.push_back("cli " + name);
    }
  }
  std::string detail = "study (1 vs 4 threads), predictor, CLI simulate/predict/detect/sweep/study byte-identical";
  if (!broken.empty()) {
    detail = "differences in:";
    for (const auto& b : broken) detail += " " + b;
  }
  report("10 determinism", broken.empty(), detail);
}

}  // namespace

int main() {
  physics_oracle();
  prior_constants();
  correlation_oracle();
  support_bounds();
  ternary();

  StudyConfig base;
  base.threads = 1;
  const StudyRuns runs = scenario_reproduction(base);
  fixed_charge_scenarios(base);
  seasonal_ordering(base, runs);
  determinism(base, runs);

  std::printf("%d acceptance check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
