#pragma once

// Heat currents, task efficiencies and second-law audits on recorded
// trajectories. Heat currents are counted positive into the system, so the
// cold current is negative while the engine runs.

#include <string>
#include <vector>

#include "json.hpp"

#include "maser/evolver.hpp"

namespace maser {

/// Tr[H L_bath rho] with the full Hamiltonian.
double heat_current(const QOperator& rho, const EngineParams& p, Bath bath);
double heat_current(const MasterEquation& eq, const QOperator& rho, Bath bath);

/// <H> with the full Hamiltonian (joint atom-field energy).
double joint_energy(const QOperator& rho, const EngineParams& p);

/// Series produced by thermo_observer, in this order.
inline const std::vector<std::string> kThermoObservables = {
    "g2",   "E_f",  "W_f",    "Wbound_f", "Eth_f",    "Wtot_f",  "S_f",  "S_af",
    "F_h_f", "F_c_f", "F_c_af", "E_af",    "J_h",      "J_c",     "dS_af_dt", "dS_f_dt"};

/// Record-time observer for the field ledger (w.r.t. omega_f a^dagger a, with
/// free energies at T_c and T_h), joint entropy and energy, heat currents and
/// the instantaneous entropy rates -Tr[rho' ln rho] of the joint and field
/// states. g2 is NaN for a near-vacuum field.
Observer thermo_observer(const EngineParams& p, Frame frame);

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;
};

/// Last quarter of the recorded time span.
TimeWindow default_window(const Trajectory& traj);

struct EntropyProduction {
  std::vector<double> times;
  std::vector<double> sigma;  // dS_af/dt - J_h/T_h - J_c/T_c
  double sigma_min = 0.0;
  double sigma_max_abs = 0.0;
  bool analytic = false;  // dS_af/dt taken from the recorded dS_af_dt series
  bool passed = false;    // sigma_min >= -1e-9 max(1, sigma_max_abs)
};

/// Per-record entropy production. Uses the recorded dS_af_dt when present and
/// centered differences of S_af otherwise. Throws PreconditionError with fewer
/// than 3 records or missing series.
EntropyProduction entropy_production_rate(const Trajectory& traj, const EngineParams& p);

struct SteadyStateCheck {
  bool ok = false;
  double max_population_rate = 0.0;  // max |dP_i/dt| over the window
  double mean_J_h = 0.0;
  std::string violation;  // empty when ok
};

SteadyStateCheck steady_state_check(const Trajectory& traj, TimeWindow window);
inline constexpr double kSteadyPopulationRate = 1e-4;

struct EfficiencyReport {
  TimeWindow window;
  double J_h = 0.0;
  double J_c = 0.0;
  double eta_E = 0.0;
  double eta_W = 0.0;
  double eta_Wtot = 0.0;
  double eta_F = 0.0;
  double eta_maser = 0.0;
  double eta_carnot = 0.0;
  double sigma_min = 0.0;
};

/// Least-squares rates of the field ledger quantities over the window divided
/// by the window-mean J_h. Throws PreconditionError when the window is not in
/// steady state or J_h <= 0.
EfficiencyReport efficiency_report(const Trajectory& traj, TimeWindow window, const EngineParams& p);

nlohmann::json to_json(const EfficiencyReport& r);

/// Slope of the least-squares line through the records inside the window.
double window_slope(const std::vector<double>& t, const std::vector<double>& y, TimeWindow window);
double window_mean(const std::vector<double>& t, const std::vector<double>& y, TimeWindow window);

struct SubadditivityAudit {
  bool passed = false;
  double worst_margin = 0.0;  // min over records of dS_f/dt - dS_af/dt
};

/// dS_af/dt <= dS_f/dt + 1e-6 at each record of a steady-state window.
SubadditivityAudit subadditivity_audit(const Trajectory& traj, TimeWindow window);

struct CarnotCheck {
  double ratio = 0.0;   // windowed dF^c_af/dt over mean J_h
  double margin = 0.0;  // eta_carnot - ratio
  double min_record_margin = 0.0;  // same, per record with |J_h| >= 1e-8
  bool passed = false;  // both margins >= -1e-6
};

/// Carnot-form bound on the joint free-energy rate at T_c. Any regime; throws
/// PreconditionError when the window-mean J_h is below 1e-8.
CarnotCheck carnot_af_check(const Trajectory& traj, TimeWindow window, const EngineParams& p);

struct ApproachCheck {
  std::vector<TimeWindow> pieces;
  std::vector<double> eta_W;
  std::vector<double> eta_F;
  bool W_monotone = false;  // |eta_maser - eta_W| strictly decreasing across pieces
  bool F_monotone = false;
};

/// Splits the window into equal consecutive pieces and computes eta_W, eta_F in
/// each, to check that both approach eta_maser monotonically.
ApproachCheck approach_check(const Trajectory& traj, TimeWindow window, const EngineParams& p,
                             int pieces = 4);

}  // namespace maser
