#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "maser/operator_core.hpp"
#include "maser/work_quantifiers.hpp"

namespace maser {

struct PhotonStats {
  double mean = 0.0;
  std::optional<double> g2;          // empty for near-vacuum states (<n> <= 1e-9)
  std::vector<double> distribution;  // p_n, Fock basis
};

PhotonStats photon_stats(const QOperator& rho_f);

struct QGridSpec {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 1.0;
  int resolution = 201;  // points per axis

  /// Square grid [-1.2 r, 1.2 r]^2 with r = sqrt(<n>) + 4.
  static QGridSpec around(double mean_photons, int resolution = 201);
  double re_at(int i) const;
  double im_at(int j) const;
  double cell_area() const;
};

struct QGrid {
  QGridSpec spec;
  Eigen::MatrixXd values;  // values(j, i): row j = Im axis, column i = Re axis

  /// Riemann sum times cell area.
  double integral() const;

  /// Three '#' header lines (re range, im range, layout) then one CSV row per Im value.
  void write_csv(std::ostream& os) const;
  static QGrid read_csv(std::istream& is);
};

/// Q(alpha) = <alpha|rho_f|alpha>/pi on the grid.
QGrid q_function(const QOperator& rho_f, const QGridSpec& spec, Warnings* warnings = nullptr);

/// Diagonal Poissonian state with the given mean, renormalised after truncation.
/// Throws DomainError when the mean is too large for dim.
QOperator poisson_state(double mean, Index dim, Warnings* warnings = nullptr);

/// (1/n_phases) sum_k |alpha e^{i phi_k}><alpha e^{i phi_k}| on a uniform phase grid.
QOperator phase_averaged_coherent(double alpha, Index dim, int n_phases);
inline int default_phase_count(Index dim) { return std::max(64, int(4 * dim)); }

struct GaussianLaserAnalytics {
  double E = 0.0;
  double E_pas = 0.0;
  double S = 0.0;
  double F = 0.0;
};

/// Closed forms for a Poissonian field of mean alpha_sq in the Gaussian
/// approximation. Throws DomainError for alpha_sq < 1.
GaussianLaserAnalytics gaussian_laser_analytics(double alpha_sq, double omega_f, double T);

struct ClassicalLimitEfficiencies {
  double eta_W = 0.0;
  double eta_F = 0.0;
};

ClassicalLimitEfficiencies classical_limit_efficiencies(double E_f, double omega_f, double T_h,
                                                        double eta_maser);

/// Ledger of a truncated field state w.r.t. omega_f a^dagger a. The thermal
/// reference ladder is extended (doubling) past the state's truncation until the
/// matched Gibbs state passes the truncation guard.
WorkLedger field_ledger(const QOperator& rho_f, double omega_f, std::span<const double> temps);
WorkLedger field_ledger_from_eigenvalues(double energy, std::span<const double> rho_eigenvalues,
                                         Index dim, double omega_f, std::span<const double> temps);

}  // namespace maser
