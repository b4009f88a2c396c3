#include "evdetect/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "evdetect/parallel.hpp"

namespace evdetect {

namespace {
constexpr std::uint64_t kXcStream = 0x78635f707265ULL;
constexpr std::size_t kBlock = 256;
}  // namespace

std::int64_t bin_index(double x, double bin_width) {
  const double q = x / bin_width;
  const double edge = std::round(q);
  // Decimal inputs on a bin edge (0.3 / 0.1 = 2.9999999999999996) belong to the upper bin.
  if (std::abs(q - edge) < 1e-9) return static_cast<std::int64_t>(edge);
  return static_cast<std::int64_t>(std::floor(q));
}

double EmpiricalDist::mass_at(std::int64_t j) const {
  if (j < first_bin || j > last_bin()) return 0.0;
  return masses[static_cast<std::size_t>(j - first_bin)];
}

double EmpiricalDist::total_mass() const {
  double s = 0.0;
  for (const double m : masses) s += m;
  return s;
}

std::int64_t EmpiricalDist::bin_of(double x) const { return bin_index(x, bin_width); }

EmpiricalDist bin_samples(std::span<const double> samples, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("bin width must be > 0");
  if (samples.empty()) throw DomainError("cannot bin an empty sample");
  std::vector<std::int64_t> idx(samples.size());
  std::transform(samples.begin(), samples.end(), idx.begin(),
                 [&](double x) { return bin_index(x, bin_width); });
  const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end());
  EmpiricalDist d;
  d.bin_width = bin_width;
  d.first_bin = *lo;
  d.sample_count = samples.size();
  std::vector<std::size_t> counts(static_cast<std::size_t>(*hi - *lo + 1), 0);
  for (const auto j : idx) ++counts[static_cast<std::size_t>(j - d.first_bin)];
  d.masses.resize(counts.size());
  const double n = static_cast<double>(samples.size());
  std::transform(counts.begin(), counts.end(), d.masses.begin(),
                 [n](std::size_t c) { return static_cast<double>(c) / n; });
  return d;
}

EmpiricalDist rebin(const EmpiricalDist& d, int factor) {
  if (factor < 1) throw DomainError("rebin factor must be >= 1");
  const auto coarse = [factor](std::int64_t j) {
    return j >= 0 ? j / factor : -((-j + factor - 1) / factor);
  };
  EmpiricalDist out;
  out.bin_width = d.bin_width * factor;
  out.sample_count = d.sample_count;
  if (d.empty()) return out;
  out.first_bin = coarse(d.first_bin);
  out.masses.assign(static_cast<std::size_t>(coarse(d.last_bin()) - out.first_bin + 1), 0.0);
  for (std::int64_t j = d.first_bin; j <= d.last_bin(); ++j) {
    out.masses[static_cast<std::size_t>(coarse(j) - out.first_bin)] += d.mass_at(j);
  }
  return out;
}

double total_variation(const EmpiricalDist& a, const EmpiricalDist& b) {
  if (std::abs(a.bin_width - b.bin_width) > 1e-12 * a.bin_width) {
    throw DomainError("total_variation: bin widths differ");
  }
  if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : 1.0;
  const auto lo = std::min(a.first_bin, b.first_bin);
  const auto hi = std::max(a.last_bin(), b.last_bin());
  double s = 0.0;
  for (auto j = lo; j <= hi; ++j) s += std::abs(a.mass_at(j) - b.mass_at(j));
  return 0.5 * s;
}

DistStats dist_stats(const EmpiricalDist& d) {
  if (d.empty()) throw DomainError("dist_stats: empty distribution");
  DistStats st;
  double best = -1.0;
  bool seen = false;
  for (auto j = d.first_bin; j <= d.last_bin(); ++j) {
    const double m = d.mass_at(j);
    st.mean += m * d.bin_center(j);
    if (m > best) {
      best = m;
      st.mode_bin = j;
    }
    if (m > 0.0) {
      if (!seen) st.min_bin = j;
      st.max_bin = j;
      seen = true;
    }
  }
  const double total = d.total_mass();
  st.mean /= total;
  for (auto j = d.first_bin; j <= d.last_bin(); ++j) {
    const double dev = d.bin_center(j) - st.mean;
    st.variance += d.mass_at(j) * dev * dev;
  }
  st.variance /= total;
  st.mode_center = d.bin_center(st.mode_bin);
  st.support_low = d.bin_left(st.min_bin);
  st.support_high = d.bin_left(st.max_bin + 1);
  return st;
}

std::vector<double> sample_xc(const PredictorInputs& in, const PredictorOptions& opt) {
  if (opt.samples == 0) throw DomainError("predict_xc: sample count must be >= 1");
  in.params.validate();
  in.mass.validate();
  in.aux.validate();
  std::vector<double> out(opt.samples);
  const std::size_t blocks = (opt.samples + kBlock - 1) / kBlock;
  parallel_for(blocks, opt.threads, [&](std::size_t b) {
    Rng rng = make_rng(opt.seed, kXcStream, b);
    const std::size_t end = std::min(opt.samples, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const double m_peop = sample_mass(in.mass, rng);
      const double w = sample_aux_power(in.aux, in.season, rng);
      out[i] = cumulative_draw(in.log, m_peop, w, in.params, in.consts);
    }
  });
  return out;
}

EmpiricalDist predict_xc(const PredictorInputs& in, const PredictorOptions& opt) {
  if (!(opt.bin_width > 0.0)) throw DomainError("predict_xc: bin width must be > 0");
  const auto xs = sample_xc(in, opt);
  return bin_samples(xs, opt.bin_width);
}

void write_histogram_csv(std::ostream& out, const EmpiricalDist& d) {
  out << "bin_left_kwh,bin_right_kwh,probability\n";
  for (auto j = d.first_bin; j <= d.last_bin(); ++j) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%#.15g\n", d.bin_left(j), d.bin_left(j + 1), d.mass_at(j));
    out << buf;
  }
}

std::string to_histogram_csv(const EmpiricalDist& d) {
  std::ostringstream out;
  write_histogram_csv(out, d);
  return out.str();
}

}  // namespace evdetect
