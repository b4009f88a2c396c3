#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evdetect/ev_physics.hpp"
#include "evdetect/stochastic_models.hpp"
#include "evdetect/trip_log.hpp"

namespace evdetect {

/// Binned probability mass on an energy axis anchored at 0 kWh: bin j covers
/// [j * bin_width, (j + 1) * bin_width). Only bins first_bin .. first_bin + size - 1
/// are stored; everything else has mass 0.
struct EmpiricalDist {
  double bin_width = 0.1;
  std::int64_t first_bin = 0;
  std::vector<double> masses;
  std::size_t sample_count = 0;

  std::int64_t last_bin() const { return first_bin + static_cast<std::int64_t>(masses.size()) - 1; }
  double origin() const { return static_cast<double>(first_bin) * bin_width; }
  double bin_left(std::int64_t j) const { return static_cast<double>(j) * bin_width; }
  double bin_center(std::int64_t j) const { return (static_cast<double>(j) + 0.5) * bin_width; }
  /// Mass of global bin j (0 outside the stored range).
  double mass_at(std::int64_t j) const;
  double total_mass() const;
  /// Index of the bin containing x.
  std::int64_t bin_of(double x) const;
  bool empty() const { return masses.empty(); }
};

/// floor(x / bin_width), with quotients within 1e-9 of an integer snapped to it.
std::int64_t bin_index(double x, double bin_width);

/// Histogram of raw samples, trimmed to the first and last occupied bins.
EmpiricalDist bin_samples(std::span<const double> samples, double bin_width);

/// Mass of `d` re-binned onto a coarser grid whose width is an integer multiple of d's.
EmpiricalDist rebin(const EmpiricalDist& d, int factor);

/// Total variation distance, 0.5 * sum |p - q| over the union of bins. Grids must match.
double total_variation(const EmpiricalDist& a, const EmpiricalDist& b);

struct DistStats {
  double mean = 0.0;
  double variance = 0.0;
  std::int64_t mode_bin = 0;  ///< highest-mass bin, lowest index on ties
  double mode_center = 0.0;   ///< x_C,MAP
  std::int64_t min_bin = 0;   ///< lowest bin with nonzero mass
  std::int64_t max_bin = 0;   ///< highest bin with nonzero mass
  double support_low = 0.0;   ///< left edge of min_bin
  double support_high = 0.0;  ///< right edge of max_bin
};

/// Moments over bin centres.
DistStats dist_stats(const EmpiricalDist& d);

struct PredictorOptions {
  std::size_t samples = 10'000;
  double bin_width = 0.1;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Everything the predictor conditions on.
struct PredictorInputs {
  const TripLog& log;
  EvParams params;
  PhysicsConstants consts;
  Season season;
  MassModel mass;
  AuxPowerModel aux;
};

/// The n raw Monte Carlo draws x_C^(i) (kWh), one (m_peop, W) pair per draw.
/// Draws are generated in fixed-size blocks with per-block seeds, so the result is
/// identical for every thread count.
std::vector<double> sample_xc(const PredictorInputs& in, const PredictorOptions& opt);

/// Empirical predictive distribution of x_C.
EmpiricalDist predict_xc(const PredictorInputs& in, const PredictorOptions& opt);

/// `bin_left_kwh,bin_right_kwh,probability` with one row per bin.
void write_histogram_csv(std::ostream& out, const EmpiricalDist& d);
std::string to_histogram_csv(const EmpiricalDist& d);

}  // namespace evdetect
