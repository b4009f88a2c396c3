#include "evdetect/ev_physics.hpp"

#include "evdetect/config.hpp"

namespace evdetect {

void EvParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw DomainError(std::string("EvParams.") + name + " must be > 0");
  };
  positive(e_max_kwh, "e_max_kwh");
  positive(m_veh_kg, "m_veh_kg");
  positive(a_veh_m2, "a_veh_m2");
  positive(j_int_kgm2, "j_int_kgm2");
  positive(c_rad, "c_rad");
  positive(c_roll, "c_roll");
  positive(c_w, "c_w");
  if (!(eta_prop > 0.0 && eta_prop < 1.0)) throw DomainError("EvParams.eta_prop must lie in (0,1)");
  if (!(eta_recup > 0.0 && eta_recup < 1.0)) throw DomainError("EvParams.eta_recup must lie in (0,1)");
}

EvParams ev_params_from(const KeyValueFile& kv) {
  const auto req = [&](const char* key) {
    const auto v = kv.get_double(key);
    if (!v) throw ParseError(kv.source_name() + ": missing key '" + key + "'");
    return *v;
  };
  EvParams p;
  p.e_max_kwh = req("e_max_kwh");
  p.m_veh_kg = req("m_veh_kg");
  p.a_veh_m2 = req("a_veh_m2");
  p.j_int_kgm2 = req("j_int_kgm2");
  p.c_rad = req("c_rad");
  p.c_roll = req("c_roll");
  p.c_w = req("c_w");
  p.eta_prop = req("eta_prop");
  p.eta_recup = req("eta_recup");
  p.validate();
  return p;
}

EvParams load_ev_params(const std::string& path) {
  const auto kv = KeyValueFile::load(path);
  auto p = ev_params_from(kv);
  kv.check_all_consumed();
  return p;
}

double vehicle_energy(double m_total_kg, double v_mps, double h_m, const EvParams& params,
                      const PhysicsConstants& consts) {
  if (!(v_mps >= 0.0)) throw DomainError("vehicle_energy: negative speed");
  if (!(m_total_kg >= params.m_veh_kg)) throw DomainError("vehicle_energy: total mass below kerb mass");
  const double v2 = v_mps * v_mps;
  return 0.5 * m_total_kg * v2 + m_total_kg * consts.g * h_m + 0.5 * params.j_int_kgm2 * v2;
}

double battery_draw(double delta_e_cons, const EvParams& params) {
  // Efficiencies multiply in both directions, as the SUMO-derived model states it.
  if (delta_e_cons > 0.0) return delta_e_cons * params.eta_prop;
  if (delta_e_cons < 0.0) return delta_e_cons * params.eta_recup;
  return 0.0;
}

EnergyStep energy_step(double v_t, double v_next, double h_t, double h_next, double m_total_kg, double w_aux_w,
                       const EvParams& params, const PhysicsConstants& consts) {
  if (!(w_aux_w >= 0.0)) throw DomainError("energy_step: negative auxiliary power");
  EnergyStep s;
  s.delta_e_req = vehicle_energy(m_total_kg, v_next, h_next, params, consts) -
                  vehicle_energy(m_total_kg, v_t, h_t, params, consts);
  const double ds = v_t;  // 1 s step
  s.delta_e_air = 0.5 * consts.rho_air * params.a_veh_m2 * params.c_w * v_t * v_t * ds;
  s.delta_e_roll = params.c_roll * m_total_kg * consts.g * ds;
  s.delta_e_aux = w_aux_w * 1.0;
  s.delta_e_cons = s.delta_e_req + s.delta_e_air + s.delta_e_roll + s.delta_e_aux;
  s.delta_x = battery_draw(s.delta_e_cons, params);
  return s;
}

double trip_draw_joules(std::span<const GpsSample> trip, double m_total_kg, double w_aux_w, const EvParams& params,
                        const PhysicsConstants& consts) {
  if (trip.size() < 2) return 0.0;
  if (!(w_aux_w >= 0.0)) throw DomainError("trip_draw: negative auxiliary power");
  if (!(m_total_kg >= params.m_veh_kg)) throw DomainError("trip_draw: total mass below kerb mass");

  // Hot loop: same arithmetic as energy_step, with E_veh carried between steps.
  const double air_k = 0.5 * consts.rho_air * params.a_veh_m2 * params.c_w;
  const double roll_k = params.c_roll * m_total_kg * consts.g;
  const double inertial = 0.5 * (m_total_kg + params.j_int_kgm2);
  const double weight = m_total_kg * consts.g;

  double total = 0.0;
  double v = trip[0].speed_mps;
  double e_now = inertial * v * v + weight * trip[0].altitude_m;
  for (std::size_t i = 1; i < trip.size(); ++i) {
    const double v_next = trip[i].speed_mps;
    const double e_next = inertial * v_next * v_next + weight * trip[i].altitude_m;
    const double cons = (e_next - e_now) + air_k * v * v * v + roll_k * v + w_aux_w;
    total += battery_draw(cons, params);
    v = v_next;
    e_now = e_next;
  }
  return total;
}

double cumulative_draw(const TripLog& log, double m_peop_kg, double w_aux_w, const EvParams& params,
                       const PhysicsConstants& consts) {
  if (!(m_peop_kg >= 0.0)) throw DomainError("cumulative_draw: negative passenger mass");
  const double m_total = params.m_veh_kg + m_peop_kg;
  double joules = 0.0;
  for (const auto trip : log.trips()) joules += trip_draw_joules(trip, m_total, w_aux_w, params, consts);
  return joules / PhysicsConstants::joules_per_kwh;
}

}  // namespace evdetect
