#include "maser/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace maser {

namespace {

struct CoreValues {
  double p[3];
  double n_mean;
  double im_sigma_plus_a;
  double tail;
};

CoreValues core_values(const QOperator& rho, Index N) {
  CoreValues v{};
  std::vector<double> pn(static_cast<std::size_t>(N), 0.0);
  for (Index i = 0; i < 3; ++i) {
    double pi = 0.0;
    for (Index n = 0; n < N; ++n) {
      const double d = rho(i * N + n, i * N + n).real();
      pi += d;
      pn[static_cast<std::size_t>(n)] += d;
      v.n_mean += double(n) * d;
    }
    v.p[i] = pi;
  }
  Complex s{0.0, 0.0};
  for (Index m = 0; m + 1 < N; ++m) s += std::sqrt(double(m + 1)) * rho(m + 1, N + m);
  v.im_sigma_plus_a = s.imag();
  const Index first = std::max<Index>(0, N - 5);
  for (Index n = first; n < N; ++n) v.tail += pn[static_cast<std::size_t>(n)];
  return v;
}

long checked_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const long k = std::lround(r);
  if (k < 1 || std::abs(r - double(k)) > 1e-9 * std::max(1.0, r)) {
    std::ostringstream os;
    os << "integrate: " << what << " must be a positive integer multiple (got ratio " << r << ")";
    throw DomainError(os.str());
  }
  return k;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

Observer scalar_observer(std::string name, std::function<double(const QOperator&)> fn) {
  Observer o;
  o.names = {std::move(name)};
  o.evaluate = [fn = std::move(fn)](const RecordState& s, std::span<double> out) {
    out[0] = fn(s.rho);
  };
  return o;
}

const std::vector<double>& Trajectory::series(const std::string& name) const {
  auto it = observables.find(name);
  if (it == observables.end()) throw PreconditionError("trajectory has no series '" + name + "'");
  return it->second;
}

void Trajectory::append(double t, const std::vector<double>& values) {
  if (values.size() != names.size())
    throw DimensionError("Trajectory::append: value count does not match column names");
  if (!times.empty() && !(t > times.back()))
    throw DomainError("Trajectory::append: record times must be strictly increasing");
  times.push_back(t);
  for (std::size_t k = 0; k < names.size(); ++k) observables[names[k]].push_back(values[k]);
}

QOperator ground_vacuum(const EngineParams& p) {
  p.validate();
  QOperator rho = QOperator::Zero(p.dim(), p.dim());
  rho(0, 0) = 1.0;
  return rho;
}

QOperator product_state(const QOperator& rho_atom, const QOperator& rho_field) {
  return kron(rho_atom, rho_field);
}

Trajectory integrate(const QOperator& rho0, const EngineParams& p, const IntegrationOptions& opt,
                     const std::vector<Observer>& observers) {
  p.validate();
  if (rho0.rows() != p.dim() || rho0.cols() != p.dim())
    throw DimensionError("integrate: initial state dimension does not match 3 x n_field");
  require_density(rho0, "integrate");
  if (!(opt.dt > 0.0) || !(opt.record_every >= opt.dt) || !(opt.t_final >= opt.record_every))
    throw DomainError("integrate: need 0 < dt <= record_every <= t_final");
  const long steps_per_record = checked_ratio(opt.record_every, opt.dt, "record_every/dt");
  const long n_records = checked_ratio(opt.t_final, opt.record_every, "t_final/record_every");

  const MasterEquation eq(p, opt.frame);
  const Index N = p.n_field;

  Trajectory traj;
  traj.dims = p.dims();
  traj.names = kCoreObservables;
  for (const Observer& o : observers)
    traj.names.insert(traj.names.end(), o.names.begin(), o.names.end());
  for (const auto& n : traj.names) traj.observables[n].reserve(std::size_t(n_records + 1));

  std::set<long> snapshot_records;
  for (double ts : opt.snapshot_times)
    snapshot_records.insert(std::clamp(std::lround(ts / opt.record_every), 0L, n_records));

  QOperator rho = rho0;
  std::vector<double> row(traj.names.size());

  auto record = [&](long index) -> bool {
    const double t = double(index) * opt.record_every;
    SanitizedDensity clean;
    try {
      clean = sanitize_density(rho, opt.sanitize_tol);
    } catch (const IntegrationFailure& e) {
      std::ostringstream os;
      os << e.what() << " at t=" << t;
      traj.complete = false;
      traj.diagnostic = os.str();
      return false;
    }
    rho = std::move(clean.rho);
    const CoreValues core = core_values(rho, N);
    RecordAudit a;
    a.trace_error = clean.audit.trace_error;
    a.hermiticity_error = clean.audit.hermiticity_error;
    a.min_eigenvalue = clean.audit.min_eigenvalue;
    a.tail_population = core.tail;
    a.flagged = clean.flagged;

    row[0] = core.p[0];
    row[1] = core.p[1];
    row[2] = core.p[2];
    row[3] = core.n_mean;
    row[4] = core.im_sigma_plus_a;
    std::size_t offset = kCoreObservables.size();
    const RecordState state{t, rho, clean.audit.eigenvalues};
    for (const Observer& o : observers) {
      o.evaluate(state, std::span<double>(row.data() + offset, o.names.size()));
      offset += o.names.size();
    }
    traj.append(t, row);
    traj.audit.push_back(a);
    if (opt.store_all_snapshots || snapshot_records.count(index)) traj.snapshots.emplace_back(t, rho);
    traj.final_state = rho;

    if (opt.tail_limit && core.tail > *opt.tail_limit) {
      std::ostringstream os;
      os << "field truncation inadequate: top-5 Fock population " << core.tail << " exceeds "
         << *opt.tail_limit << " at t=" << t << " (increase n_field)";
      traj.complete = false;
      traj.diagnostic = os.str();
      return false;
    }
    return true;
  };

  if (!record(0)) return traj;

  const Index D = p.dim();
  QOperator k1(D, D), k2(D, D), k3(D, D), k4(D, D), tmp(D, D);
  const double dt = opt.dt;
  for (long r = 1; r <= n_records; ++r) {
    for (long s = 0; s < steps_per_record; ++s) {
      eq.rhs(rho, k1);
      tmp = rho + (0.5 * dt) * k1;
      eq.rhs(tmp, k2);
      tmp = rho + (0.5 * dt) * k2;
      eq.rhs(tmp, k3);
      tmp = rho + dt * k3;
      eq.rhs(tmp, k4);
      rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!record(r)) return traj;
  }
  return traj;
}

std::vector<double> finite_difference(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2)
    throw PreconditionError("finite_difference: need at least 2 matching samples");
  const std::size_t n = t.size();
  std::vector<double> d(n);
  d[0] = (y[1] - y[0]) / (t[1] - t[0]);
  d[n - 1] = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (t[k + 1] - t[k - 1]);
  return d;
}

double EhrenfestResiduals::max_photon() const { return max_of(photon); }
double EhrenfestResiduals::max_p2() const { return max_of(p2); }
double EhrenfestResiduals::max_p3() const { return max_of(p3); }

EhrenfestResiduals ehrenfest_residuals(const Trajectory& traj, const EngineParams& p) {
  if (traj.size() < 3) throw PreconditionError("ehrenfest_residuals: need at least 3 records");
  const double n_h = thermal_occupation(p.omega_h(), p.T_h);
  const double n_c = thermal_occupation(p.omega_c(), p.T_c);
  const auto& t = traj.times;
  const auto& n = traj.series("n_mean");
  const auto& p2 = traj.series("P2");
  const auto& p3 = traj.series("P3");
  const auto& im = traj.series("im_sigma_plus_a");

  EhrenfestResiduals r;
  const double gh = p.gamma_h, gc = p.gamma_c;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double h = t[k + 1] - t[k - 1];
    const double dn = (n[k + 1] - n[k - 1]) / h;
    const double dp2 = (p2[k + 1] - p2[k - 1]) / h;
    const double dp3 = (p3[k + 1] - p3[k - 1]) / h;
    const double rate_n = -2.0 * p.g * im[k];
    const double rate_p2 = 2.0 * p.g * im[k] + 2.0 * gc * (n_c + 1.0) * p3[k] - 2.0 * gc * n_c * p2[k];
    const double rate_p3 = -(2.0 * gh * (n_h + 1.0) + 2.0 * gc * (n_c + 1.0) + 2.0 * gh * n_h) * p3[k] -
                           2.0 * (gh * n_h - gc * n_c) * p2[k] + 2.0 * gh * n_h;
    r.times.push_back(t[k]);
    r.photon.push_back(std::abs(dn - rate_n));
    r.p2.push_back(std::abs(dp2 - rate_p2));
    r.p3.push_back(std::abs(dp3 - rate_p3));
    r.photon_rate.push_back(rate_n);
  }
  return r;
}

}  // namespace maser
