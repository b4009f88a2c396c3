#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "evdetect_test_cli";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const fs::path out = kWork / "stdout.txt";
  const std::string cmd = std::string(EVDETECT_CLI) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

std::map<std::string, std::string> fields(const std::string& text) {
  std::map<std::string, std::string> m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

/// Small shared fixture: a six-trip summer log and a fast config.
struct Fixture {
  fs::path gps = kWork / "sim" / "gps.csv";
  fs::path config = kWork / "fast.conf";

  Fixture() {
    static bool ready = false;
    if (ready) return;
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    spit(kWork / "trips.conf", "n_trips = 6\nmean_trip_duration_s = 300\ntrip_seed = 4\n");
    spit(config, "ev_params = " EVDETECT_DATA_DIR "/kia_soul_ev_2020.conf\nsamples = 2000\nseed = 3\n");
    const auto r = run("simulate --config " + (kWork / "trips.conf").string() + " --season summer --out " +
                       (kWork / "sim").string());
    REQUIRE(r.code == 0);
    ready = true;
  }
};

double histogram_total(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  double total = 0;
  while (std::getline(in, line)) total += std::stod(line.substr(line.rfind(',') + 1));
  return total;
}

}  // namespace

TEST_CASE("predict writes a normalised histogram") {
  Fixture f;
  const auto dir = kWork / "p1";
  const auto r = run("predict --gps " + f.gps.string() + " --config " + f.config.string() + " --out " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(histogram_total(slurp(dir / "xc_histogram.csv")) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fields(r.out).count("mean_kwh") == 1);
  CHECK(fields(r.out)["season"] == "summer");
}

TEST_CASE("predict is byte-reproducible across runs and thread counts") {
  Fixture f;
  const std::string base = "predict --gps " + f.gps.string() + " --config " + f.config.string();
  REQUIRE(run(base + " --out " + (kWork / "a").string()).code == 0);
  REQUIRE(run(base + " --out " + (kWork / "b").string()).code == 0);
  REQUIRE(run(base + " --threads 4 --out " + (kWork / "c").string()).code == 0);
  const auto a = slurp(kWork / "a" / "xc_histogram.csv");
  CHECK(a == slurp(kWork / "b" / "xc_histogram.csv"));
  CHECK(a == slurp(kWork / "c" / "xc_histogram.csv"));
  CHECK(slurp(kWork / "a" / "xc_stats.txt") == slurp(kWork / "c" / "xc_stats.txt"));
}

TEST_CASE("predict winter flag widens the distribution") {
  Fixture f;
  const std::string base = "predict --gps " + f.gps.string() + " --config " + f.config.string();
  const auto s = run(base + " --season summer --out " + (kWork / "s").string());
  const auto w = run(base + " --season winter --out " + (kWork / "w").string());
  REQUIRE(s.code == 0);
  REQUIRE(w.code == 0);
  CHECK(std::stod(fields(w.out)["variance_kwh2"]) > std::stod(fields(s.out)["variance_kwh2"]));
}

TEST_CASE("predict reports parse errors with path and row") {
  Fixture f;
  const auto r = run("predict --gps " EVDETECT_FIXTURE_DIR "/reject_spacing_gap.csv --out " +
                     (kWork / "bad").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("reject_spacing_gap.csv") != std::string::npos);
  CHECK(r.out.find("row 2") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "bad" / "xc_histogram.csv"));
}

TEST_CASE("detect decisions and exit codes") {
  Fixture f;
  const std::string base = "detect --gps " + f.gps.string() + " --config " + f.config.string() + " --driver d1";
  auto stats = fields(run("predict --gps " + f.gps.string() + " --config " + f.config.string() + " --out " +
                                (kWork / "m").string())
                                .out);
  const double mode = std::stod(stats["mode_kwh"]);

  const auto low = run(base + " --p1 0.5 --x0 20 --x1 19.5");
  CHECK(low.code == 2);
  CHECK(fields(low.out)["decision"] == "H1");

  std::ostringstream x1;
  x1 << 35.0 - mode;
  const auto at_mode = run(base + " --p1 0.5 --x0 35 --x1 " + x1.str());
  CHECK((at_mode.code == 0 || at_mode.code == 3));
  CHECK(std::stod(fields(at_mode.out)["posterior"]) <= 0.5);

  CHECK(run(base + " --x0 20 --x1 10").code == 1);
  CHECK(run(base + " --p1 0.5 --x0 40 --x1 10").code == 1);
  CHECK(run(base + " --p1 0.5 --x0 20 --x1 -1").code == 1);
}

TEST_CASE("detect propagates the prior through the state file") {
  Fixture f;
  const auto state = kWork / "state.csv";
  fs::remove(state);
  const std::string base = "detect --gps " + f.gps.string() + " --config " + f.config.string() +
                           " --driver d7 --state " + state.string() + " --lambda 0.9 --x0 20 --x1 15";
  const auto first = run(base + " --p1 0.5 --soc-after 33");
  REQUIRE((first.code == 0 || first.code == 2 || first.code == 3));
  const double post1 = std::stod(fields(first.out)["posterior"]);
  const auto csv1 = slurp(state);
  CHECK(csv1.find("d7,") != std::string::npos);
  CHECK(csv1.find(",33,") != std::string::npos);

  const auto second = run(base + " --g-max 100");
  REQUIRE(second.code != 1);
  auto f2 = fields(second.out);
  CHECK(std::stod(f2["p1_used"]) == doctest::Approx(0.9 * post1).epsilon(1e-12));
  CHECK(std::stod(f2["bonus"]) == doctest::Approx(100 * (1 - std::stod(f2["posterior"]))));
  CHECK(std::stod(f2["next_p1"]) == doctest::Approx(0.9 * std::stod(f2["posterior"])).epsilon(1e-12));
}

TEST_CASE("invalid detect input leaves the state file untouched") {
  Fixture f;
  const auto state = kWork / "state_keep.csv";
  spit(state, "driver_id,p1,last_certified_soc_kwh,last_certified_timestamp\nd9,0.3,,\n");
  const auto before = slurp(state);
  const auto r = run("detect --gps " EVDETECT_FIXTURE_DIR "/reject_negative_speed.csv --config " +
                     f.config.string() + " --driver d9 --state " + state.string() + " --x0 20 --x1 10");
  CHECK(r.code == 1);
  CHECK(slurp(state) == before);
}

TEST_CASE("tiny study") {
  Fixture f;
  const auto conf = kWork / "study.conf";
  spit(conf, "trials_per_season = 100\nsamples = 1000\nn_trips = 5\nmean_trip_duration_s = 300\n");
  const auto dir = kWork / "study";
  const auto r = run("study --config " + conf.string() + " --out " + dir.string());
  REQUIRE(r.code == 0);
  for (const char* season : {"summer", "winter"}) {
    std::istringstream in(slurp(dir / ("confusion_" + std::string(season) + ".csv")));
    std::string line;
    std::getline(in, line);
    CHECK(line == "truth,decided_h0,decided_h1,decided_e");
    CHECK(fs::exists(dir / ("posterior_" + std::string(season) + "_h0.csv")));
    CHECK(fs::exists(dir / ("posterior_" + std::string(season) + "_h1.csv")));
  }
  const auto again = run("study --config " + conf.string() + " --threads 3 --out " + (kWork / "study2").string());
  REQUIRE(again.code == 0);
  CHECK(slurp(dir / "summary.txt") == slurp(kWork / "study2" / "summary.txt"));
  CHECK(slurp(dir / "confusion_winter.csv") == slurp(kWork / "study2" / "confusion_winter.csv"));
}

TEST_CASE("simulate output round-trips through predict") {
  Fixture f;
  const auto r = run("simulate --season winter --seed 8 --out " + (kWork / "simw").string());
  REQUIRE(r.code == 0);
  const auto p = run("predict --gps " + (kWork / "simw" / "gps.csv").string() + " --samples 200 --out " +
                     (kWork / "pw").string());
  CHECK(p.code == 0);
  CHECK(fields(p.out)["season"] == "winter");
  CHECK(run("simulate --out " + (kWork / "x").string()).code == 1);
}

TEST_CASE("sweep writes curve and histogram") {
  Fixture f;
  const auto dir = kWork / "sweep";
  const auto r = run("sweep --gps " + f.gps.string() + " --config " + f.config.string() +
                     " --x-u 3.5 --n 500 --out " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "sweep_curve.csv"));
  CHECK(histogram_total(slurp(dir / "xd_histogram.csv")) == doctest::Approx(1.0));
  const auto again = run("sweep --gps " + f.gps.string() + " --config " + f.config.string() +
                         " --x-u 3.5 --n 500 --threads 2 --out " + (kWork / "sweep2").string());
  CHECK(slurp(dir / "sweep_curve.csv") == slurp(kWork / "sweep2" / "sweep_curve.csv"));
  CHECK(slurp(dir / "xd_histogram.csv") == slurp(kWork / "sweep2" / "xd_histogram.csv"));
}

TEST_CASE("usage errors") {
  CHECK(run("").code == 1);
  CHECK(run("predict").code == 1);
  CHECK(run("predict --gps /nonexistent.csv").code == 1);
  CHECK(run("--help").code == 0);
}
