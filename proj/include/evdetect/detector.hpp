#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "evdetect/predictor.hpp"
#include "evdetect/stochastic_models.hpp"

namespace evdetect {

enum class Decision { h0, h1, erasure };

enum class SupportFlag {
  in_support,
  below_both_supports,  ///< x_d < min x_C - x_u_max
  above_both_supports,  ///< x_d > max x_C
};

std::string_view to_string(Decision d);
std::string_view to_string(SupportFlag f);

/// Posterior in [0, accept_h0_max] -> H0, (accept_h1_above, 1] -> H1, otherwise E.
struct Thresholds {
  double accept_h0_max = 0.4;
  double accept_h1_above = 0.6;
  void validate() const;
};

Decision ternary_decision(double posterior, const Thresholds& thresholds = {});

/// Previous certified SoC x0 and current plug-in SoC x1 (kWh).
struct SocPair {
  double x0 = 0.0;
  double x1 = 0.0;
  double x_d() const { return x0 - x1; }
  /// Throws DomainError unless both lie in [0, capacity].
  void validate(double capacity_kwh) const;
};

struct DetectorOutput {
  double posterior_h1 = 0.0;
  Decision decision = Decision::h0;
  double f_h0_at_xd = 0.0;
  double f_h1_at_xd = 0.0;
  std::int64_t xd_bin_index = 0;
  SupportFlag support = SupportFlag::in_support;
  double p1_used = 0.0;
};

/// Slab bin offsets: undeclared energy u * bin_width for u in (lo, hi], each with mass 1/(hi - lo).
struct SlabGrid {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t width() const { return hi - lo; }
};

/// Throws DomainError when x_u_min or x_u_max is not a whole number of bins.
SlabGrid slab_grid(const UndeclaredModel& undeclared, double bin_width);

/// x_D | H1: discrete correlation of the x_C histogram with the uniform slab,
/// F(x_D = j | H1) = sum_u F(x_C = j + u) / (hi - lo).
EmpiricalDist xd_dist_h1(const EmpiricalDist& xc, const UndeclaredModel& undeclared);

/// Two-component x_D mixture p1 * F(. | H1) + (1 - p1) * F(. | H0), with the H0
/// component equal to the x_C histogram.
EmpiricalDist xd_mixture(const EmpiricalDist& xc, const UndeclaredModel& undeclared);

/// Holds both x_D components for repeated evaluation against many observations.
class Detector {
 public:
  Detector(EmpiricalDist xc, const UndeclaredModel& undeclared, Thresholds thresholds = {});

  /// Posterior Pr[H1 | x_d]. `p1` overrides the model's prior.
  DetectorOutput detect(double x_d, std::optional<double> p1 = std::nullopt) const;
  DetectorOutput detect_bin(std::int64_t xd_bin, std::optional<double> p1 = std::nullopt) const;

  const EmpiricalDist& xc() const { return xc_; }
  const EmpiricalDist& h1() const { return h1_; }
  const UndeclaredModel& undeclared() const { return undeclared_; }
  const Thresholds& thresholds() const { return thresholds_; }
  /// Lowest and highest bins of the x_D mixture support.
  std::int64_t support_min_bin() const { return h1_.first_bin; }
  std::int64_t support_max_bin() const { return xc_.last_bin(); }

 private:
  EmpiricalDist xc_;
  EmpiricalDist h1_;
  UndeclaredModel undeclared_;
  Thresholds thresholds_;
};

DetectorOutput posterior_h1(const EmpiricalDist& xc, const UndeclaredModel& undeclared, double x_d,
                            const Thresholds& thresholds = {});

/// Next interval's prior: lambda * posterior.
double update_prior(double posterior, double lambda);

/// Probability-weighted incentive: (1 - posterior) * g_max.
double weighted_bonus(double posterior, double g_max);

/// Line-oriented `key=value` detection record.
std::string format_report(const DetectorOutput& out, std::optional<double> bonus = std::nullopt);

}  // namespace evdetect
