#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "evdetect/trip_log.hpp"

namespace evdetect {

class KeyValueFile;

/// Known per-model vehicle constants.
struct EvParams {
  double e_max_kwh = 35.0;     ///< battery capacity
  double m_veh_kg = 1682.0;    ///< kerb mass
  double a_veh_m2 = 2.6;       ///< front surface area
  double j_int_kgm2 = 40.0;    ///< internal moment of inertia
  double c_rad = 0.1;          ///< radial drag coefficient (carried, not used by the model)
  double c_roll = 0.01;        ///< roll drag coefficient
  double c_w = 0.35;           ///< air drag coefficient
  double eta_prop = 0.98;      ///< propulsion efficiency, (0,1)
  double eta_recup = 0.96;     ///< recuperation efficiency, (0,1)

  /// KIA Soul EV 2020.
  static EvParams kia_soul_ev_2020() { return {}; }

  /// Throws DomainError unless every field is positive and both efficiencies lie in (0,1).
  void validate() const;
};

/// Reads keys e_max_kwh, m_veh_kg, a_veh_m2, j_int_kgm2, c_rad, c_roll, c_w, eta_prop,
/// eta_recup. All nine are required.
EvParams ev_params_from(const KeyValueFile& kv);
EvParams load_ev_params(const std::string& path);

struct PhysicsConstants {
  double g = 9.81;          ///< m/s^2
  double rho_air = 1.2041;  ///< kg/m^3, dry air at 20 C
  static constexpr double joules_per_kwh = 3.6e6;
};

/// Energy bookkeeping for one 1 s interval (t, t+1]. All values in joules.
struct EnergyStep {
  double delta_e_req = 0.0;
  double delta_e_air = 0.0;
  double delta_e_roll = 0.0;
  double delta_e_aux = 0.0;
  double delta_e_cons = 0.0;
  double delta_x = 0.0;  ///< drawn from the battery; negative when recuperating
};

/// Kinetic + potential + rotational energy (J).
double vehicle_energy(double m_total_kg, double v_mps, double h_m, const EvParams& params,
                      const PhysicsConstants& consts = {});

/// Battery draw for a consumed energy: scaled by eta_prop when positive, eta_recup
/// when negative, zero at zero.
double battery_draw(double delta_e_cons, const EvParams& params);

EnergyStep energy_step(double v_t, double v_next, double h_t, double h_next, double m_total_kg, double w_aux_w,
                       const EvParams& params, const PhysicsConstants& consts = {});

/// Energy drawn over one trip's consecutive samples (J). Fewer than two samples draw nothing.
double trip_draw_joules(std::span<const GpsSample> trip, double m_total_kg, double w_aux_w, const EvParams& params,
                        const PhysicsConstants& consts = {});

/// x_C: cumulative energy drawn over every step of every trip (kWh), with
/// m_total = m_veh + m_peop and auxiliary power held constant over the interval.
double cumulative_draw(const TripLog& log, double m_peop_kg, double w_aux_w, const EvParams& params,
                       const PhysicsConstants& consts = {});

}  // namespace evdetect
