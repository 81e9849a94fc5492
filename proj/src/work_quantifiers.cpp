#include "maser/work_quantifiers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace maser {

namespace {

constexpr double kEntropyFloor = 1e-14;
constexpr double kMatchTolerance = 1e-9;  // |S(T) - s_target|

std::vector<double> to_vector(const RealVector& v) { return {v.data(), v.data() + v.size()}; }

void require_same_dim(const QOperator& rho, const QOperator& h, const char* what) {
  if (rho.rows() != rho.cols() || h.rows() != h.cols() || rho.rows() != h.rows()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << rho.rows() << "x" << rho.cols() << " vs " << h.rows()
       << "x" << h.cols() << ")";
    throw DimensionError(os.str());
  }
}

// Descending order of a spectrum with stable tie-breaking on input position.
std::vector<double> descending(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  std::stable_sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

double min_level(std::span<const double> levels) {
  return *std::min_element(levels.begin(), levels.end());
}

// Bisection of a monotonically increasing function of T on a log scale, run
// until the bracket is at round-off width.
template <class F>
double bisect_log(F&& f, double target, double lo, double hi) {
  for (int it = 0; it < 400 && hi / lo - 1.0 > 1e-14; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (f(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

double entropy_from_eigenvalues(std::span<const double> eigenvalues) {
  double s = 0.0;
  for (double l : eigenvalues) {
    if (l < -1e-8) {
      std::ostringstream os;
      os << "von_neumann_entropy: eigenvalue " << l << " below -1e-8 (unphysical state)";
      throw DomainError(os.str());
    }
    if (l > kEntropyFloor) s -= l * std::log(l);
  }
  return s;
}

double von_neumann_entropy(const QOperator& rho) {
  const RealVector ev = hermitian_eigenvalues(0.5 * (rho + rho.adjoint()));
  return entropy_from_eigenvalues(to_vector(ev));
}

double passive_energy(std::span<const double> rho_eigenvalues, std::span<const double> energies) {
  if (energies.size() < rho_eigenvalues.size())
    throw DimensionError("passive_energy: fewer energy levels than state eigenvalues");
  const std::vector<double> r = descending(rho_eigenvalues);
  std::vector<double> e(energies.begin(), energies.end());
  std::stable_sort(e.begin(), e.end());
  double total = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) total += r[k] * e[k];
  return total;
}

QOperator passive_state(const QOperator& rho, const QOperator& h) {
  require_same_dim(rho, h, "passive_state");
  const RealVector r = hermitian_eigenvalues(0.5 * (rho + rho.adjoint()));
  const Spectrum hs = hermitian_eig(h);
  const std::vector<double> occ = descending(to_vector(r));
  RealVector diag(static_cast<Index>(occ.size()));
  for (std::size_t k = 0; k < occ.size(); ++k) diag[Index(k)] = occ[k];
  return hs.eigenvectors * diag.asDiagonal() * hs.eigenvectors.adjoint();
}

double ergotropy(const QOperator& rho, const QOperator& h) {
  require_same_dim(rho, h, "ergotropy");
  const RealVector r = hermitian_eigenvalues(0.5 * (rho + rho.adjoint()));
  const RealVector e = hermitian_eigenvalues(h);
  return expectation(rho, h) - passive_energy(to_vector(r), to_vector(e));
}

std::vector<double> gibbs_populations(std::span<const double> levels, double T) {
  if (!(T > 0.0)) throw DomainError("gibbs: temperature must be > 0");
  if (levels.empty()) throw DimensionError("gibbs: no levels");
  const double e0 = min_level(levels);
  std::vector<double> p(levels.size());
  double z = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    p[k] = std::exp(-(levels[k] - e0) / T);
    z += p[k];
  }
  for (double& x : p) x /= z;
  return p;
}

double gibbs_entropy(std::span<const double> levels, double T) {
  const std::vector<double> p = gibbs_populations(levels, T);
  double s = 0.0;
  for (double x : p)
    if (x > 0.0) s -= x * std::log(x);
  return s;
}

double gibbs_energy(std::span<const double> levels, double T) {
  const std::vector<double> p = gibbs_populations(levels, T);
  double e = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) e += p[k] * levels[k];
  return e;
}

QOperator gibbs_state(const QOperator& h, double T) {
  if (!(T > 0.0)) throw DomainError("gibbs_state: temperature must be > 0");
  const Spectrum hs = hermitian_eig(h);
  const std::vector<double> p = gibbs_populations(to_vector(hs.eigenvalues), T);
  RealVector diag(static_cast<Index>(p.size()));
  for (std::size_t k = 0; k < p.size(); ++k) diag[Index(k)] = p[k];
  return hs.eigenvectors * diag.asDiagonal() * hs.eigenvectors.adjoint();
}

EntropyMatch match_entropy_levels(std::span<const double> levels, double s_target) {
  const double s_max = std::log(double(levels.size()));
  if (!(s_target >= 0.0)) throw DomainError("match_entropy_temperature: negative target entropy");
  if (s_target >= s_max - 1e-9) {
    std::ostringstream os;
    os << "match_entropy_temperature: entropy " << s_target
       << " unreachable on truncated space (ln dim = " << s_max << ")";
    throw DomainError(os.str());
  }
  EntropyMatch m;
  auto s_of = [&](double T) { return gibbs_entropy(levels, T); };
  if (s_of(kMinMatchTemperature) >= s_target - kMatchTolerance) {
    m.temperature = kMinMatchTemperature;
    m.clamped = true;
  } else {
    const double spread =
        *std::max_element(levels.begin(), levels.end()) - min_level(levels);
    double hi = std::max(1.0, spread);
    for (int it = 0; s_of(hi) <= s_target; ++it) {
      if (it > 2000) throw DomainError("match_entropy_temperature: bracket expansion failed");
      hi *= 2.0;
    }
    m.temperature = bisect_log(s_of, s_target, kMinMatchTemperature, hi);
  }
  m.energy = gibbs_energy(levels, m.temperature);
  return m;
}

std::pair<double, QOperator> match_entropy_temperature(const QOperator& h, double s_target) {
  const RealVector e = hermitian_eigenvalues(h);
  const EntropyMatch m = match_entropy_levels(to_vector(e), s_target);
  return {m.temperature, gibbs_state(h, m.temperature)};
}

double WorkLedger::free_energy(double T) const {
  for (const auto& [temp, f] : F)
    if (temp == T) return f;
  throw DomainError("WorkLedger: free energy not computed for requested temperature");
}

WorkLedger ledger_from_spectra(double energy, std::span<const double> rho_eigenvalues,
                               std::span<const double> h_eigenvalues,
                               std::span<const double> temps, const LedgerOptions& options) {
  WorkLedger l;
  l.E = energy;
  l.E_pas = passive_energy(rho_eigenvalues, h_eigenvalues);
  l.W = l.E - l.E_pas;
  l.S = entropy_from_eigenvalues(rho_eigenvalues);
  const std::span<const double> ref =
      options.reference_levels.empty() ? h_eigenvalues : std::span<const double>(options.reference_levels);
  const EntropyMatch m = match_entropy_levels(ref, l.S);
  l.T_match = m.temperature;
  l.E_th = m.energy;
  if (options.truncation_guard) {
    std::vector<double> sorted(ref.begin(), ref.end());
    std::stable_sort(sorted.begin(), sorted.end());
    const std::vector<double> p = gibbs_populations(sorted, m.temperature);
    double tail = 0.0;
    for (std::size_t k = p.size() >= 5 ? p.size() - 5 : 0; k < p.size(); ++k) tail += p[k];
    if (tail > options.guard_limit) {
      std::ostringstream os;
      os << "ledger: truncation inadequate, matched Gibbs state has top-5 population " << tail;
      throw DomainError(os.str());
    }
  }
  l.W_bound = l.E_pas - l.E_th;
  for (double T : temps) l.F.emplace_back(T, l.E - T * l.S);
  return l;
}

WorkLedger ledger(const QOperator& rho, const QOperator& h, std::span<const double> temps,
                  const LedgerOptions& options) {
  require_same_dim(rho, h, "ledger");
  const RealVector r = hermitian_eigenvalues(0.5 * (rho + rho.adjoint()));
  const RealVector e = hermitian_eigenvalues(h);
  return ledger_from_spectra(expectation(rho, h), to_vector(r), to_vector(e), temps, options);
}

FreeEnergyTerms free_energy_decomposition(const QOperator& rho, const QOperator& h, double T) {
  const double temps[] = {T};
  const WorkLedger l = ledger(rho, h, temps);
  FreeEnergyTerms terms;
  terms.W = l.W;
  terms.W_bound = l.W_bound;
  terms.F_thermal = l.E_th - T * l.S;
  return terms;
}

NonExtensivity non_extensivity_check(const QOperator& rho, const QOperator& h) {
  require_same_dim(rho, h, "non_extensivity_check");
  if (rho.rows() > 8) throw DimensionError("non_extensivity_check: dimension above 8");
  const QOperator id = identity(h.rows());
  NonExtensivity r;
  r.W_single = ergotropy(rho, h);
  r.W_two_copy_per_copy = 0.5 * ergotropy(kron(rho, rho), kron(h, id) + kron(id, h));
  return r;
}

Landscape free_energy_landscape_levels(std::span<const double> levels, double T_ref,
                                       std::span<const double> energy_grid) {
  if (!(T_ref > 0.0)) throw DomainError("free_energy_landscape: T_ref must be > 0");
  Landscape out;
  const double e0 = min_level(levels);
  // T -> infinity limit of the thermal energy on a finite ladder.
  const double e_inf = std::accumulate(levels.begin(), levels.end(), 0.0) / double(levels.size());
  for (double E : energy_grid) {
    LandscapePoint pt;
    pt.energy = E;
    pt.pure_F = E;
    if (std::abs(E - e0) <= 1e-12 * std::max(1.0, std::abs(e0))) {
      pt.temperature = 0.0;
      pt.thermal_F = e0;
    } else if (E < e0 || E >= e_inf) {
      std::ostringstream os;
      os << "free_energy_landscape: energy " << E << " outside thermal range [" << e0 << ", "
         << e_inf << ")";
      out.warnings.push_back(os.str());
      continue;
    } else {
      auto e_of = [&](double T) { return gibbs_energy(levels, T); };
      double hi = std::max(1.0, e_inf - e0);
      while (e_of(hi) < E) hi *= 2.0;
      pt.temperature = bisect_log(e_of, E, kMinMatchTemperature, hi);
      pt.thermal_F = E - T_ref * gibbs_entropy(levels, pt.temperature);
    }
    out.points.push_back(pt);
  }
  return out;
}

Landscape free_energy_landscape(const QOperator& h, double T_ref, std::span<const double> energy_grid) {
  return free_energy_landscape_levels(to_vector(hermitian_eigenvalues(h)), T_ref, energy_grid);
}

}  // namespace maser
