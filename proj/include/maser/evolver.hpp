#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maser/maser_model.hpp"

namespace maser {

/// What an observer sees at a record time: the sanitised state and its
/// (ascending) eigenvalues, which the integrator already had to compute.
struct RecordState {
  double time;
  const QOperator& rho;
  const RealVector& eigenvalues;
};

/// A pure function of the record state producing one value per name.
struct Observer {
  std::vector<std::string> names;
  std::function<void(const RecordState&, std::span<double>)> evaluate;
};

Observer scalar_observer(std::string name, std::function<double(const QOperator&)> fn);

struct IntegrationOptions {
  double t_final = 100.0;
  double dt = 1e-3;
  double record_every = 0.5;
  Frame frame = Frame::Rotating;
  bool store_all_snapshots = false;
  std::vector<double> snapshot_times;  // stored in addition, matched to the nearest record
  double sanitize_tol = 1e-8;
  /// Abort when the summed population of the top five Fock states exceeds this.
  std::optional<double> tail_limit = 1e-7;
};

struct RecordAudit {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  double tail_population = 0.0;
  bool flagged = false;
};

/// Names of the series every integration records.
inline const std::vector<std::string> kCoreObservables = {"P1", "P2", "P3", "n_mean",
                                                          "im_sigma_plus_a"};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> names;  // column order, core observables first
  std::map<std::string, std::vector<double>> observables;
  std::vector<RecordAudit> audit;
  std::vector<std::pair<double, QOperator>> snapshots;
  QOperator final_state;  // state at the last record
  SubsystemDims dims;
  bool complete = true;
  std::string diagnostic;

  std::size_t size() const { return times.size(); }
  bool has(const std::string& name) const { return observables.count(name) != 0; }
  /// Throws PreconditionError when the series was not recorded.
  const std::vector<double>& series(const std::string& name) const;
  /// Appends one record; used by the integrator and by synthetic test trajectories.
  void append(double t, const std::vector<double>& values);
};

/// Fixed-step classical RK4 on master_rhs. The state is sanitised at every
/// record time. A hard sanitisation failure or a tripped truncation monitor
/// ends the run early: the partial trajectory is returned with complete=false.
Trajectory integrate(const QOperator& rho0, const EngineParams& p, const IntegrationOptions& opt,
                     const std::vector<Observer>& observers = {});

/// Initial states.
QOperator ground_vacuum(const EngineParams& p);
QOperator product_state(const QOperator& rho_atom, const QOperator& rho_field);

struct EhrenfestResiduals {
  std::vector<double> times;        // interior record times
  std::vector<double> photon;       // |d<n>/dt - (-2g Im<sigma+ a>)|
  std::vector<double> p2;
  std::vector<double> p3;
  std::vector<double> photon_rate;  // analytic d<n>/dt, for scaling
  double max_photon() const;
  double max_p2() const;
  double max_p3() const;
};

/// Centered-difference check of the three Ehrenfest equations on the recorded
/// core observables. Throws PreconditionError with fewer than 3 records.
EhrenfestResiduals ehrenfest_residuals(const Trajectory& traj, const EngineParams& p);

/// Centered finite differences (one-sided at the ends) of a recorded series.
std::vector<double> finite_difference(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace maser
