#include "evdetect/detector.hpp"

#include <cmath>
#include <sstream>

#include "evdetect/config.hpp"

namespace evdetect {

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::h0:
      return "H0";
    case Decision::h1:
      return "H1";
    case Decision::erasure:
      return "E";
  }
  return "?";
}

std::string_view to_string(SupportFlag f) {
  switch (f) {
    case SupportFlag::in_support:
      return "in_support";
    case SupportFlag::below_both_supports:
      return "below_both_supports";
    case SupportFlag::above_both_supports:
      return "above_both_supports";
  }
  return "?";
}

void Thresholds::validate() const {
  if (!(accept_h0_max >= 0.0 && accept_h0_max <= accept_h1_above && accept_h1_above <= 1.0)) {
    throw DomainError("thresholds must satisfy 0 <= h0_max <= h1_above <= 1");
  }
}

Decision ternary_decision(double posterior, const Thresholds& thresholds) {
  if (!(posterior >= 0.0 && posterior <= 1.0)) throw DomainError("posterior outside [0,1]");
  if (posterior <= thresholds.accept_h0_max) return Decision::h0;
  if (posterior > thresholds.accept_h1_above) return Decision::h1;
  return Decision::erasure;
}

void SocPair::validate(double capacity_kwh) const {
  if (!(x0 >= 0.0 && x0 <= capacity_kwh)) throw DomainError("x0 outside [0, e_max]");
  if (!(x1 >= 0.0 && x1 <= capacity_kwh)) throw DomainError("x1 outside [0, e_max]");
}

SlabGrid slab_grid(const UndeclaredModel& undeclared, double bin_width) {
  const auto to_bins = [bin_width](double kwh, const char* name) {
    const double r = kwh / bin_width;
    const double n = std::round(r);
    if (std::abs(r - n) > 1e-6) {
      throw DomainError(std::string(name) + " = " + format_double(kwh) + " kWh is not a multiple of the bin width " +
                        format_double(bin_width));
    }
    return static_cast<std::int64_t>(n);
  };
  SlabGrid g{to_bins(undeclared.x_u_min_kwh, "x_u_min"), to_bins(undeclared.x_u_max_kwh, "x_u_max")};
  if (g.lo < 0 || g.hi <= g.lo) throw DomainError("slab must cover at least one bin");
  return g;
}

namespace {

EmpiricalDist trimmed(EmpiricalDist d) {
  std::size_t lo = 0;
  std::size_t hi = d.masses.size();
  while (lo < hi && d.masses[lo] == 0.0) ++lo;
  while (hi > lo && d.masses[hi - 1] == 0.0) --hi;
  if (lo == hi) throw DomainError("distribution has no mass");
  d.first_bin += static_cast<std::int64_t>(lo);
  d.masses = std::vector<double>(d.masses.begin() + static_cast<std::ptrdiff_t>(lo),
                                 d.masses.begin() + static_cast<std::ptrdiff_t>(hi));
  return d;
}

}  // namespace

EmpiricalDist xd_dist_h1(const EmpiricalDist& xc_in, const UndeclaredModel& undeclared) {
  const EmpiricalDist xc = trimmed(xc_in);
  const SlabGrid slab = slab_grid(undeclared, xc.bin_width);
  const double weight = 1.0 / static_cast<double>(slab.width());

  EmpiricalDist out;
  out.bin_width = xc.bin_width;
  out.sample_count = xc.sample_count;
  out.first_bin = xc.first_bin - slab.hi;
  const std::int64_t last = xc.last_bin() - slab.lo - 1;
  out.masses.assign(static_cast<std::size_t>(last - out.first_bin + 1), 0.0);
  // Each x_C bin c spreads weight * mass to x_D bins c - u, u in (lo, hi].
  for (std::int64_t c = xc.first_bin; c <= xc.last_bin(); ++c) {
    const double spread = xc.mass_at(c) * weight;
    if (spread == 0.0) continue;
    for (std::int64_t u = slab.lo + 1; u <= slab.hi; ++u) {
      out.masses[static_cast<std::size_t>(c - u - out.first_bin)] += spread;
    }
  }
  return out;
}

EmpiricalDist xd_mixture(const EmpiricalDist& xc_in, const UndeclaredModel& undeclared) {
  const EmpiricalDist xc = trimmed(xc_in);
  const EmpiricalDist h1 = xd_dist_h1(xc, undeclared);
  EmpiricalDist out;
  out.bin_width = xc.bin_width;
  out.sample_count = xc.sample_count;
  out.first_bin = std::min(h1.first_bin, xc.first_bin);
  const auto last = std::max(h1.last_bin(), xc.last_bin());
  out.masses.assign(static_cast<std::size_t>(last - out.first_bin + 1), 0.0);
  for (auto j = out.first_bin; j <= last; ++j) {
    out.masses[static_cast<std::size_t>(j - out.first_bin)] =
        undeclared.p1 * h1.mass_at(j) + (1.0 - undeclared.p1) * xc.mass_at(j);
  }
  return out;
}

Detector::Detector(EmpiricalDist xc, const UndeclaredModel& undeclared, Thresholds thresholds)
    : xc_(trimmed(std::move(xc))), undeclared_(undeclared), thresholds_(thresholds) {
  if (!(undeclared_.p1 >= 0.0 && undeclared_.p1 <= 1.0)) throw DomainError("p1 must lie in [0,1]");
  thresholds_.validate();
  h1_ = xd_dist_h1(xc_, undeclared_);
}

DetectorOutput Detector::detect(double x_d, std::optional<double> p1) const {
  if (!std::isfinite(x_d)) throw DomainError("x_d must be finite");
  return detect_bin(xc_.bin_of(x_d), p1);
}

DetectorOutput Detector::detect_bin(std::int64_t j, std::optional<double> p1_override) const {
  const double p1 = p1_override.value_or(undeclared_.p1);
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("p1 must lie in [0,1]");
  DetectorOutput out;
  out.xd_bin_index = j;
  out.p1_used = p1;
  out.f_h0_at_xd = xc_.mass_at(j);
  out.f_h1_at_xd = h1_.mass_at(j);
  if (j < support_min_bin()) {
    out.support = SupportFlag::below_both_supports;
    out.posterior_h1 = 1.0;
  } else if (j > support_max_bin()) {
    out.support = SupportFlag::above_both_supports;
    out.posterior_h1 = 0.0;
  } else {
    const double num = p1 * out.f_h1_at_xd;
    const double den = num + (1.0 - p1) * out.f_h0_at_xd;
    // An empty interior bin keeps the prior.
    out.posterior_h1 = den > 0.0 ? num / den : p1;
  }
  out.decision = ternary_decision(out.posterior_h1, thresholds_);
  return out;
}

DetectorOutput posterior_h1(const EmpiricalDist& xc, const UndeclaredModel& undeclared, double x_d,
                            const Thresholds& thresholds) {
  return Detector(xc, undeclared, thresholds).detect(x_d);
}

double update_prior(double posterior, double lambda) {
  if (!(posterior >= 0.0 && posterior <= 1.0)) throw DomainError("posterior outside [0,1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("forgetting factor outside [0,1]");
  return lambda * posterior;
}

double weighted_bonus(double posterior, double g_max) {
  if (!(posterior >= 0.0 && posterior <= 1.0)) throw DomainError("posterior outside [0,1]");
  if (!(g_max >= 0.0)) throw DomainError("maximal bonus must be >= 0");
  return (1.0 - posterior) * g_max;
}

std::string format_report(const DetectorOutput& out, std::optional<double> bonus) {
  std::ostringstream s;
  s << "posterior=" << format_double(out.posterior_h1) << '\n'
    << "decision=" << to_string(out.decision) << '\n'
    << "f_h0=" << format_double(out.f_h0_at_xd) << '\n'
    << "f_h1=" << format_double(out.f_h1_at_xd) << '\n'
    << "xd_bin=" << out.xd_bin_index << '\n'
    << "flags=" << to_string(out.support) << '\n'
    << "p1_used=" << format_double(out.p1_used) << '\n';
  if (bonus) s << "bonus=" << format_double(*bonus) << '\n';
  return s.str();
}

}  // namespace evdetect
