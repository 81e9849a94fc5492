#include "maser/thermo_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "maser/field_optics.hpp"
#include "maser/work_quantifiers.hpp"

namespace maser {

namespace {

// Zero eigenvalues get a finite logarithm; their weight in Tr[rho' ln rho] is
// round-off sized anyway.
constexpr double kLogFloor = 1e-300;

// Tr[H_JC X] from the nonzeros g sqrt(m+1) at (|1,m+1>, |2,m>) and its transpose.
double jc_trace(const QOperator& x, double g, Index N) {
  double s = 0.0;
  for (Index m = 0; m + 1 < N; ++m) {
    const double c = std::sqrt(double(m + 1));
    s += c * (x(N + m, m + 1) + x(m + 1, N + m)).real();
  }
  return g * s;
}

double free_trace(const QOperator& x, const EngineParams& p) {
  const Index N = p.n_field;
  const double levels[3] = {p.omega1, p.omega2, p.omega3};
  double s = 0.0;
  for (Index a = 0; a < 3; ++a)
    for (Index n = 0; n < N; ++n) s += (levels[a] + p.omega_f * double(n)) * x(a * N + n, a * N + n).real();
  return s;
}

// -Tr[rho' ln rho] given the eigen-decomposition of rho.
double entropy_rate(const Spectrum& s, const QOperator& rho_dot) {
  double rate = 0.0;
  for (Index k = 0; k < s.eigenvalues.size(); ++k) {
    const double w = (s.eigenvectors.col(k).adjoint() * rho_dot * s.eigenvectors.col(k))(0, 0).real();
    rate -= w * std::log(std::max(s.eigenvalues[k], kLogFloor));
  }
  return rate;
}

std::vector<std::size_t> window_indices(const std::vector<double>& t, TimeWindow w) {
  const double eps = 1e-9 * std::max(1.0, std::abs(w.end));
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= w.start - eps && t[k] <= w.end + eps) idx.push_back(k);
  return idx;
}

std::vector<std::size_t> require_window(const Trajectory& traj, TimeWindow w, const char* what) {
  if (!(w.end > w.start)) throw PreconditionError(std::string(what) + ": empty window");
  auto idx = window_indices(traj.times, w);
  if (idx.size() < 3) throw PreconditionError(std::string(what) + ": fewer than 3 records in window");
  return idx;
}

double eta_carnot(const EngineParams& p) { return 1.0 - p.T_c / p.T_h; }
double eta_maser(const EngineParams& p) { return p.omega_f / p.omega_h(); }

void require_steady(const Trajectory& traj, TimeWindow w, const char* what) {
  const SteadyStateCheck s = steady_state_check(traj, w);
  if (!s.ok) throw PreconditionError(std::string(what) + ": " + s.violation);
}

}  // namespace

double heat_current(const MasterEquation& eq, const QOperator& rho, Bath bath) {
  const EngineParams& p = eq.params();
  QOperator l = QOperator::Zero(rho.rows(), rho.cols());
  eq.add_dissipation(bath, rho, l);
  return free_trace(l, p) + jc_trace(l, p.g, p.n_field);
}

double heat_current(const QOperator& rho, const EngineParams& p, Bath bath) {
  if (rho.rows() != p.dim() || rho.cols() != p.dim())
    throw DimensionError("heat_current: state dimension does not match 3 x n_field");
  return heat_current(MasterEquation(p, Frame::Lab), rho, bath);
}

double joint_energy(const QOperator& rho, const EngineParams& p) {
  if (rho.rows() != p.dim() || rho.cols() != p.dim())
    throw DimensionError("joint_energy: state dimension does not match 3 x n_field");
  return free_trace(rho, p) + jc_trace(rho, p.g, p.n_field);
}

Observer thermo_observer(const EngineParams& p, Frame frame) {
  p.validate();
  auto eq = std::make_shared<const MasterEquation>(p, frame);
  Observer o;
  o.names = kThermoObservables;
  o.evaluate = [p, eq](const RecordState& s, std::span<double> out) {
    const Index N = p.n_field;
    const SubsystemDims dims = p.dims();
    QOperator rho_dot(s.rho.rows(), s.rho.cols());
    eq->rhs(s.rho, rho_dot);

    const double S_af = entropy_from_eigenvalues(
        std::span<const double>(s.eigenvalues.data(), std::size_t(s.eigenvalues.size())));
    const double dS_af = entropy_rate(hermitian_eig(s.rho), rho_dot);
    const double E_af = joint_energy(s.rho, p);

    const QOperator rho_f = partial_trace(s.rho, Subsystem::Field, dims);
    const QOperator rho_f_dot = partial_trace(rho_dot, Subsystem::Field, dims);
    const Spectrum fs = hermitian_eig(0.5 * (rho_f + rho_f.adjoint()));
    const double dS_f = entropy_rate(fs, rho_f_dot);
    const PhotonStats ps = photon_stats(rho_f);
    const double E_f = p.omega_f * ps.mean;
    const double temps[] = {p.T_c, p.T_h};
    const WorkLedger l = field_ledger_from_eigenvalues(
        E_f, std::span<const double>(fs.eigenvalues.data(), std::size_t(N)), N, p.omega_f, temps);

    const double values[] = {ps.g2.value_or(std::numeric_limits<double>::quiet_NaN()),
                             E_f,
                             l.W,
                             l.W_bound,
                             l.E_th,
                             l.W_total(),
                             l.S,
                             S_af,
                             l.free_energy(p.T_h),
                             l.free_energy(p.T_c),
                             E_af - p.T_c * S_af,
                             E_af,
                             heat_current(*eq, s.rho, Bath::Hot),
                             heat_current(*eq, s.rho, Bath::Cold),
                             dS_af,
                             dS_f};
    std::copy(std::begin(values), std::end(values), out.begin());
  };
  return o;
}

TimeWindow default_window(const Trajectory& traj) {
  if (traj.size() < 2) throw PreconditionError("default_window: need at least 2 records");
  const double t0 = traj.times.front(), t1 = traj.times.back();
  return {t1 - 0.25 * (t1 - t0), t1};
}

EntropyProduction entropy_production_rate(const Trajectory& traj, const EngineParams& p) {
  if (traj.size() < 3) throw PreconditionError("entropy_production_rate: need at least 3 records");
  const auto& jh = traj.series("J_h");
  const auto& jc = traj.series("J_c");
  EntropyProduction ep;
  ep.analytic = traj.has("dS_af_dt");
  const std::vector<double> ds =
      ep.analytic ? traj.series("dS_af_dt") : finite_difference(traj.times, traj.series("S_af"));
  ep.times = traj.times;
  ep.sigma.resize(traj.size());
  ep.sigma_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    ep.sigma[k] = ds[k] - jh[k] / p.T_h - jc[k] / p.T_c;
    ep.sigma_min = std::min(ep.sigma_min, ep.sigma[k]);
    ep.sigma_max_abs = std::max(ep.sigma_max_abs, std::abs(ep.sigma[k]));
  }
  ep.passed = ep.sigma_min >= -1e-9 * std::max(1.0, ep.sigma_max_abs);
  return ep;
}

double window_slope(const std::vector<double>& t, const std::vector<double>& y, TimeWindow w) {
  const auto idx = window_indices(t, w);
  if (idx.size() < 2) throw PreconditionError("window_slope: fewer than 2 records in window");
  double tm = 0.0, ym = 0.0;
  for (auto k : idx) {
    tm += t[k];
    ym += y[k];
  }
  tm /= double(idx.size());
  ym /= double(idx.size());
  double num = 0.0, den = 0.0;
  for (auto k : idx) {
    num += (t[k] - tm) * (y[k] - ym);
    den += (t[k] - tm) * (t[k] - tm);
  }
  return num / den;
}

double window_mean(const std::vector<double>& t, const std::vector<double>& y, TimeWindow w) {
  const auto idx = window_indices(t, w);
  if (idx.empty()) throw PreconditionError("window_mean: no records in window");
  double s = 0.0;
  for (auto k : idx) s += y[k];
  return s / double(idx.size());
}

SteadyStateCheck steady_state_check(const Trajectory& traj, TimeWindow w) {
  const auto idx = require_window(traj, w, "steady_state_check");
  SteadyStateCheck c;
  for (const char* name : {"P1", "P2", "P3"}) {
    const auto d = finite_difference(traj.times, traj.series(name));
    for (auto k : idx) c.max_population_rate = std::max(c.max_population_rate, std::abs(d[k]));
  }
  c.mean_J_h = window_mean(traj.times, traj.series("J_h"), w);
  std::ostringstream os;
  if (!(c.max_population_rate < kSteadyPopulationRate)) {
    os << "window [" << w.start << ", " << w.end << "] not in steady state: max |dP/dt| = "
       << c.max_population_rate << " >= " << kSteadyPopulationRate;
  } else if (!(c.mean_J_h > 0.0)) {
    os << "not operating as engine: mean J_h = " << c.mean_J_h << " <= 0";
  }
  c.violation = os.str();
  c.ok = c.violation.empty();
  return c;
}

EfficiencyReport efficiency_report(const Trajectory& traj, TimeWindow w, const EngineParams& p) {
  require_steady(traj, w, "efficiency_report");
  const auto& t = traj.times;
  EfficiencyReport r;
  r.window = w;
  r.J_h = window_mean(t, traj.series("J_h"), w);
  r.J_c = window_mean(t, traj.series("J_c"), w);
  r.eta_E = window_slope(t, traj.series("E_f"), w) / r.J_h;
  r.eta_W = window_slope(t, traj.series("W_f"), w) / r.J_h;
  r.eta_Wtot = window_slope(t, traj.series("Wtot_f"), w) / r.J_h;
  r.eta_F = window_slope(t, traj.series("F_h_f"), w) / r.J_h;
  r.eta_maser = eta_maser(p);
  r.eta_carnot = eta_carnot(p);
  const EntropyProduction ep = entropy_production_rate(traj, p);
  r.sigma_min = std::numeric_limits<double>::infinity();
  for (auto k : window_indices(t, w)) r.sigma_min = std::min(r.sigma_min, ep.sigma[k]);
  return r;
}

nlohmann::json to_json(const EfficiencyReport& r) {
  return {{"t_start", r.window.start}, {"t_end", r.window.end},     {"J_h", r.J_h},
          {"J_c", r.J_c},              {"eta_E", r.eta_E},           {"eta_W", r.eta_W},
          {"eta_Wtot", r.eta_Wtot},    {"eta_F", r.eta_F},           {"eta_maser", r.eta_maser},
          {"eta_carnot", r.eta_carnot}, {"sigma_min", r.sigma_min}};
}

SubadditivityAudit subadditivity_audit(const Trajectory& traj, TimeWindow w) {
  require_steady(traj, w, "subadditivity_audit");
  const auto idx = window_indices(traj.times, w);
  const std::vector<double> ds_af = traj.has("dS_af_dt")
                                        ? traj.series("dS_af_dt")
                                        : finite_difference(traj.times, traj.series("S_af"));
  const std::vector<double> ds_f = traj.has("dS_f_dt")
                                       ? traj.series("dS_f_dt")
                                       : finite_difference(traj.times, traj.series("S_f"));
  SubadditivityAudit a;
  a.worst_margin = std::numeric_limits<double>::infinity();
  for (auto k : idx) a.worst_margin = std::min(a.worst_margin, ds_f[k] - ds_af[k]);
  a.passed = a.worst_margin >= -1e-6;
  return a;
}

CarnotCheck carnot_af_check(const Trajectory& traj, TimeWindow w, const EngineParams& p) {
  const auto idx = require_window(traj, w, "carnot_af_check");
  const auto& jh = traj.series("J_h");
  const double mean_jh = window_mean(traj.times, jh, w);
  if (!(mean_jh >= 1e-8)) {
    std::ostringstream os;
    os << "carnot_af_check: mean J_h = " << mean_jh << " below 1e-8 (ratio undefined)";
    throw PreconditionError(os.str());
  }
  // dE_af/dt = J_h + J_c exactly, so with the analytic entropy rate the joint
  // free-energy rate needs no differencing.
  std::vector<double> rate;
  if (traj.has("dS_af_dt")) {
    const auto& jc = traj.series("J_c");
    const auto& ds = traj.series("dS_af_dt");
    rate.resize(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) rate[k] = jh[k] + jc[k] - p.T_c * ds[k];
  } else {
    rate = finite_difference(traj.times, traj.series("F_c_af"));
  }
  CarnotCheck c;
  c.ratio = window_mean(traj.times, rate, w) / mean_jh;
  c.margin = eta_carnot(p) - c.ratio;
  c.min_record_margin = std::numeric_limits<double>::infinity();
  for (auto k : idx)
    if (std::abs(jh[k]) >= 1e-8 && jh[k] > 0.0)
      c.min_record_margin = std::min(c.min_record_margin, eta_carnot(p) - rate[k] / jh[k]);
  c.passed = c.margin >= -1e-6 && c.min_record_margin >= -1e-6;
  return c;
}

ApproachCheck approach_check(const Trajectory& traj, TimeWindow w, const EngineParams& p, int pieces) {
  if (pieces < 2) throw DomainError("approach_check: need at least 2 pieces");
  require_steady(traj, w, "approach_check");
  ApproachCheck a;
  const double width = (w.end - w.start) / double(pieces);
  for (int k = 0; k < pieces; ++k) {
    const TimeWindow sub{w.start + width * double(k), w.start + width * double(k + 1)};
    const double jh = window_mean(traj.times, traj.series("J_h"), sub);
    a.pieces.push_back(sub);
    a.eta_W.push_back(window_slope(traj.times, traj.series("W_f"), sub) / jh);
    a.eta_F.push_back(window_slope(traj.times, traj.series("F_h_f"), sub) / jh);
  }
  auto approaching = [&](const std::vector<double>& eta) {
    for (std::size_t k = 1; k < eta.size(); ++k)
      if (!(std::abs(eta_maser(p) - eta[k]) < std::abs(eta_maser(p) - eta[k - 1]))) return false;
    return true;
  };
  a.W_monotone = approaching(a.eta_W);
  a.F_monotone = approaching(a.eta_F);
  return a;
}

}  // namespace maser
