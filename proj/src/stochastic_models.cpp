#include "evdetect/stochastic_models.hpp"

#include <cmath>
#include <numbers>

#include "evdetect/config.hpp"

namespace evdetect {

void MassModel::validate() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < occupancy_pmf.size(); ++i) {
    if (!(occupancy_pmf[i] >= 0.0)) throw DomainError("occupancy pmf entries must be nonnegative");
    if (i > 0 && occupancy_pmf[i] > occupancy_pmf[i - 1]) {
      throw DomainError("occupancy pmf must be non-increasing in the number of people");
    }
    sum += occupancy_pmf[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("occupancy pmf must sum to 1");
  if (!(per_person_mean_kg > 0.0)) throw DomainError("per-person mean mass must be > 0");
  if (!(sigma_coeff >= 0.0)) throw DomainError("sigma coefficient must be >= 0");
}

double MassModel::expected_occupancy() const {
  double e = 0.0;
  for (std::size_t i = 0; i < occupancy_pmf.size(); ++i) e += static_cast<double>(i + 1) * occupancy_pmf[i];
  return e;
}

double MassModel::component_sd(int k) const { return sigma_coeff * std::sqrt(static_cast<double>(k)); }

double sample_mass(const MassModel& model, Rng& rng) {
  std::discrete_distribution<int> occupancy(model.occupancy_pmf.begin(), model.occupancy_pmf.end());
  const int k = occupancy(rng) + 1;
  const double mu = model.component_mean(k);
  const double sd = model.component_sd(k);
  if (sd == 0.0) return mu;
  std::normal_distribution<double> normal(mu, sd);
  while (true) {
    const double m = normal(rng);
    if (m > 0.0) return m;
  }
}

double mass_component_density(const MassModel& model, int k, double m_kg) {
  if (m_kg <= 0.0) return 0.0;
  const double mu = model.component_mean(k);
  const double sd = model.component_sd(k);
  if (sd == 0.0) return 0.0;
  const double z = (m_kg - mu) / sd;
  const double pdf = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  const double kept = 0.5 * std::erfc(-mu / (sd * std::numbers::sqrt2));  // Pr[N(mu, sd^2) > 0]
  return pdf / kept;
}

double mass_density(const MassModel& model, double m_kg) {
  double f = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const double p = model.occupancy_pmf[static_cast<std::size_t>(k - 1)];
    if (p > 0.0) f += p * mass_component_density(model, k, m_kg);
  }
  return f;
}

GammaParams gamma_from_moments(double mean, double variance) {
  if (!(mean > 0.0) || !(variance > 0.0)) {
    throw DomainError("gamma_from_moments: mean and variance must be > 0");
  }
  return GammaParams{mean * mean / variance, variance / mean};
}

void AuxPowerModel::validate() const {
  for (const auto* g : {&winter, &summer}) {
    if (!(g->shape > 0.0) || !(g->scale > 0.0)) throw DomainError("gamma shape and scale must be > 0");
  }
}

double sample_aux_power(const AuxPowerModel& model, Season season, Rng& rng) {
  const auto& g = model.for_season(season);
  std::gamma_distribution<double> gamma(g.shape, g.scale);
  return gamma(rng);
}

void UndeclaredModel::validate(double capacity_kwh) const {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("p1 must lie in [0,1]");
  if (!(x_u_min_kwh >= 0.0)) throw DomainError("x_u_min must be >= 0");
  if (!(x_u_min_kwh < x_u_max_kwh)) throw DomainError("x_u_min must be < x_u_max");
  if (x_u_max_kwh > capacity_kwh) throw DomainError("x_u_max must not exceed the battery capacity");
}

Hypothesis sample_hypothesis(double p1, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < p1 ? Hypothesis::h1 : Hypothesis::h0;
}

double sample_undeclared(const UndeclaredModel& model, Hypothesis hypothesis, Rng& rng) {
  if (hypothesis == Hypothesis::h0) return 0.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // u in [0,1) maps onto (min, max].
  return model.x_u_max_kwh - (model.x_u_max_kwh - model.x_u_min_kwh) * u(rng);
}

void apply_overrides(const KeyValueFile& kv, MassModel& mass, AuxPowerModel& aux, UndeclaredModel& undeclared) {
  if (auto pmf = kv.get_doubles("occupancy_pmf")) {
    if (pmf->size() != 5) throw ParseError(kv.source_name() + ": occupancy_pmf needs exactly 5 entries");
    std::copy(pmf->begin(), pmf->end(), mass.occupancy_pmf.begin());
  }
  if (auto v = kv.get_double("per_person_mean_kg")) mass.per_person_mean_kg = *v;
  if (auto v = kv.get_double("sigma_coeff")) mass.sigma_coeff = *v;
  if (auto v = kv.get_double("winter_shape")) aux.winter.shape = *v;
  if (auto v = kv.get_double("winter_scale")) aux.winter.scale = *v;
  if (auto v = kv.get_double("summer_shape")) aux.summer.shape = *v;
  if (auto v = kv.get_double("summer_scale")) aux.summer.scale = *v;
  if (auto v = kv.get_double("p1")) undeclared.p1 = *v;
  if (auto v = kv.get_double("x_u_min_kwh")) undeclared.x_u_min_kwh = *v;
  if (auto v = kv.get_double("x_u_max_kwh")) undeclared.x_u_max_kwh = *v;
  mass.validate();
  aux.validate();
}

}  // namespace evdetect
