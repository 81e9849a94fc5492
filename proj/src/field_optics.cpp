#include "maser/field_optics.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace maser {

PhotonStats photon_stats(const QOperator& rho_f) {
  if (rho_f.rows() != rho_f.cols()) throw DimensionError("photon_stats: operator is not square");
  PhotonStats st;
  const Index N = rho_f.rows();
  st.distribution.resize(static_cast<std::size_t>(N));
  double second = 0.0;  // <a^dag a^dag a a> = sum n(n-1) p_n
  for (Index n = 0; n < N; ++n) {
    const double p = rho_f(n, n).real();
    st.distribution[static_cast<std::size_t>(n)] = p;
    st.mean += double(n) * p;
    second += double(n) * double(n - 1) * p;
  }
  if (st.mean > 1e-9) st.g2 = second / (st.mean * st.mean);
  return st;
}

QGridSpec QGridSpec::around(double mean_photons, int resolution) {
  const double r = std::sqrt(std::max(0.0, mean_photons)) + 4.0;
  return {-1.2 * r, 1.2 * r, -1.2 * r, 1.2 * r, resolution};
}

double QGridSpec::re_at(int i) const {
  return resolution == 1 ? re_min : re_min + (re_max - re_min) * double(i) / double(resolution - 1);
}

double QGridSpec::im_at(int j) const {
  return resolution == 1 ? im_min : im_min + (im_max - im_min) * double(j) / double(resolution - 1);
}

double QGridSpec::cell_area() const {
  if (resolution < 2) return 0.0;
  return (re_max - re_min) / double(resolution - 1) * (im_max - im_min) / double(resolution - 1);
}

double QGrid::integral() const { return values.sum() * spec.cell_area(); }

void QGrid::write_csv(std::ostream& os) const {
  os.precision(17);
  os << "# re_min,re_max,re_points," << spec.re_min << ',' << spec.re_max << ',' << spec.resolution
     << '\n';
  os << "# im_min,im_max,im_points," << spec.im_min << ',' << spec.im_max << ',' << spec.resolution
     << '\n';
  os << "# rows: im ascending; columns: re ascending; values: Q(alpha)\n";
  for (Index j = 0; j < values.rows(); ++j) {
    for (Index i = 0; i < values.cols(); ++i) {
      if (i) os << ',';
      os << values(j, i);
    }
    os << '\n';
  }
}

QGrid QGrid::read_csv(std::istream& is) {
  auto header = [&](const char* tag, double& lo, double& hi, int& n) {
    std::string line;
    if (!std::getline(is, line) || line.rfind(tag, 0) != 0)
      throw DomainError(std::string("QGrid::read_csv: missing header '") + tag + "'");
    std::istringstream ls(line.substr(std::string(tag).size()));
    char comma = 0;
    if (!(ls >> lo >> comma >> hi >> comma >> n)) throw DomainError("QGrid::read_csv: bad header");
  };
  QGrid g;
  int ny = 0;
  header("# re_min,re_max,re_points,", g.spec.re_min, g.spec.re_max, g.spec.resolution);
  header("# im_min,im_max,im_points,", g.spec.im_min, g.spec.im_max, ny);
  if (ny != g.spec.resolution) throw DomainError("QGrid::read_csv: non-square grid");
  std::string line;
  std::getline(is, line);
  g.values.resize(ny, g.spec.resolution);
  for (int j = 0; j < ny; ++j) {
    if (!std::getline(is, line)) throw DomainError("QGrid::read_csv: truncated body");
    std::istringstream ls(line);
    for (int i = 0; i < g.spec.resolution; ++i) {
      std::string cell;
      std::getline(ls, cell, ',');
      g.values(j, i) = std::stod(cell);
    }
  }
  return g;
}

QGrid q_function(const QOperator& rho_f, const QGridSpec& spec, Warnings* warnings) {
  if (rho_f.rows() != rho_f.cols()) throw DimensionError("q_function: operator is not square");
  if (spec.resolution < 1) throw DomainError("q_function: resolution must be positive");
  const Index N = rho_f.rows();
  QGrid grid;
  grid.spec = spec;
  grid.values.resize(spec.resolution, spec.resolution);
  Warnings local;
  for (int j = 0; j < spec.resolution; ++j) {
    for (int i = 0; i < spec.resolution; ++i) {
      const StateVector c = coherent_vector({spec.re_at(i), spec.im_at(j)}, N, &local);
      grid.values(j, i) = (c.adjoint() * rho_f * c)(0, 0).real() / std::numbers::pi;
    }
  }
  if (!local.empty()) {
    std::ostringstream os;
    os << "q_function: " << local.size()
       << " grid points exceed the coherent-state truncation adequacy bound";
    warn(warnings, os.str());
  }
  return grid;
}

QOperator poisson_state(double mean, Index dim, Warnings* warnings) {
  if (dim <= 0) throw DimensionError("poisson_state: dimension must be positive");
  if (!(mean >= 0.0)) throw DomainError("poisson_state: mean must be >= 0");
  if (mean > double(dim) - 6.0 * std::sqrt(mean)) {
    std::ostringstream os;
    os << "poisson_state: mean " << mean << " too large for " << dim << " Fock states";
    throw DomainError(os.str());
  }
  QOperator rho = QOperator::Zero(dim, dim);
  if (mean == 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  double total = 0.0;
  std::vector<double> p(static_cast<std::size_t>(dim));
  for (Index n = 0; n < dim; ++n) {
    p[std::size_t(n)] = std::exp(double(n) * std::log(mean) - mean - std::lgamma(double(n) + 1.0));
    total += p[std::size_t(n)];
  }
  if (1.0 - total > 1e-12) {
    std::ostringstream os;
    os << "poisson_state: truncation discards probability " << 1.0 - total;
    warn(warnings, os.str());
  }
  for (Index n = 0; n < dim; ++n) rho(n, n) = p[std::size_t(n)] / total;
  return rho;
}

QOperator phase_averaged_coherent(double alpha, Index dim, int n_phases) {
  if (n_phases < 64) throw DomainError("phase_averaged_coherent: need at least 64 phases");
  QOperator rho = QOperator::Zero(dim, dim);
  for (int k = 0; k < n_phases; ++k) {
    const double phi = 2.0 * std::numbers::pi * double(k) / double(n_phases);
    const StateVector c = coherent_vector(std::polar(alpha, phi), dim);
    rho.noalias() += c * c.adjoint();
  }
  return rho / double(n_phases);
}

GaussianLaserAnalytics gaussian_laser_analytics(double alpha_sq, double omega_f, double T) {
  if (!(alpha_sq >= 1.0))
    throw DomainError("gaussian_laser_analytics: alpha^2 < 1, Gaussian approximation invalid");
  const double alpha = std::sqrt(alpha_sq);
  GaussianLaserAnalytics g;
  g.E = omega_f * alpha_sq;
  g.E_pas = omega_f * (2.0 * std::sqrt(2.0 / std::numbers::pi) * alpha - 0.5);
  g.S = 0.5 + std::log(std::sqrt(2.0 * std::numbers::pi)) + std::log(alpha);
  g.F = g.E - T * g.S;
  return g;
}

ClassicalLimitEfficiencies classical_limit_efficiencies(double E_f, double omega_f, double T_h,
                                                        double eta_maser) {
  if (!(E_f > 0.0)) throw DomainError("classical_limit_efficiencies: field energy must be > 0");
  ClassicalLimitEfficiencies e;
  e.eta_W = eta_maser * (1.0 - std::sqrt(2.0 * omega_f / (std::numbers::pi * E_f)));
  e.eta_F = eta_maser * (1.0 - T_h / (2.0 * E_f));
  return e;
}

WorkLedger field_ledger_from_eigenvalues(double energy, std::span<const double> rho_eigenvalues,
                                         Index dim, double omega_f, std::span<const double> temps) {
  std::vector<double> levels(static_cast<std::size_t>(dim));
  for (Index n = 0; n < dim; ++n) levels[std::size_t(n)] = omega_f * double(n);
  LedgerOptions opt;
  opt.truncation_guard = true;
  for (Index n_ref = dim;; n_ref *= 2) {
    opt.reference_levels.resize(static_cast<std::size_t>(n_ref));
    for (Index n = 0; n < n_ref; ++n) opt.reference_levels[std::size_t(n)] = omega_f * double(n);
    try {
      return ledger_from_spectra(energy, rho_eigenvalues, levels, temps, opt);
    } catch (const DomainError&) {
      if (n_ref > (Index{1} << 16)) throw;
    }
  }
}

WorkLedger field_ledger(const QOperator& rho_f, double omega_f, std::span<const double> temps) {
  if (rho_f.rows() != rho_f.cols()) throw DimensionError("field_ledger: operator is not square");
  const RealVector ev = hermitian_eigenvalues(0.5 * (rho_f + rho_f.adjoint()));
  double energy = 0.0;
  for (Index n = 0; n < rho_f.rows(); ++n) energy += omega_f * double(n) * rho_f(n, n).real();
  return field_ledger_from_eigenvalues(energy, std::span<const double>(ev.data(), std::size_t(ev.size())),
                                       rho_f.rows(), omega_f, temps);
}

}  // namespace maser
