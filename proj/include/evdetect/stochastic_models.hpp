#pragma once

#include <array>

#include "evdetect/common.hpp"

namespace evdetect {

class KeyValueFile;

/// Passenger mass prior: occupancy N_p in 1..5, then a Gaussian per occupancy
/// with mean k * per_person_mean and standard deviation sigma_coeff * sqrt(k),
/// each truncated to positive mass.
struct MassModel {
  std::array<double, 5> occupancy_pmf{0.61, 0.23, 0.11, 0.04, 0.01};
  double per_person_mean_kg = 74.0;
  double sigma_coeff = 12.0;

  /// Nonnegative, sums to 1 within 1e-12, non-increasing in k. sigma_coeff may be 0
  /// (point-mass components).
  void validate() const;
  /// Sum of k * p_k.
  double expected_occupancy() const;
  double component_mean(int k) const { return per_person_mean_kg * k; }
  double component_sd(int k) const;
};

double sample_mass(const MassModel& model, Rng& rng);
/// Mixture density over m > 0, each component renormalised for its truncation at 0.
double mass_density(const MassModel& model, double m_kg);
/// Density of component k (1-based) after truncation.
double mass_component_density(const MassModel& model, int k, double m_kg);

struct GammaParams {
  double shape = 1.0;
  double scale = 1.0;
  double mean() const { return shape * scale; }
  double variance() const { return shape * scale * scale; }
};

/// shape = mean^2 / variance, scale = variance / mean.
GammaParams gamma_from_moments(double mean, double variance);

/// Seasonal auxiliary power prior, W | season ~ Gamma(shape, scale).
struct AuxPowerModel {
  GammaParams winter{3.0, 800.0};
  GammaParams summer{2.0, 400.0};

  const GammaParams& for_season(Season s) const { return s == Season::winter ? winter : summer; }
  void validate() const;
};

double sample_aux_power(const AuxPowerModel& model, Season season, Rng& rng);

/// Slab-and-spike prior on undeclared energy: 0 under H0, uniform on
/// (x_u_min, x_u_max] under H1. Pr[H1] = p1.
struct UndeclaredModel {
  double p1 = 0.5;
  double x_u_min_kwh = 0.0;
  double x_u_max_kwh = 35.0;

  /// 0 <= p1 <= 1, 0 <= x_u_min < x_u_max <= capacity.
  void validate(double capacity_kwh) const;
};

double sample_undeclared(const UndeclaredModel& model, Hypothesis hypothesis, Rng& rng);
Hypothesis sample_hypothesis(double p1, Rng& rng);

/// Applies any of occupancy_pmf, per_person_mean_kg, sigma_coeff, winter_shape,
/// winter_scale, summer_shape, summer_scale, p1, x_u_min_kwh, x_u_max_kwh found in `kv`.
void apply_overrides(const KeyValueFile& kv, MassModel& mass, AuxPowerModel& aux, UndeclaredModel& undeclared);

}  // namespace evdetect
