#pragma once

// Dense complex operator algebra on the truncated atom (3 levels) x field (N Fock
// states) Hilbert space. Joint basis index = atom_level * N + photon_number, which
// is the ordering produced by kron(atom_op, field_op).

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "maser/errors.hpp"

namespace maser {

using Complex = std::complex<double>;
using QOperator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Subsystem { Atom, Field };

struct SubsystemDims {
  Index atom = 3;
  Index field = 1;
  Index total() const { return atom * field; }
};

/// Eigen-decomposition of a Hermitian operator. Eigenvalues ascending, ties in
/// the order the solver produced them; eigenvectors are the matching columns.
struct Spectrum {
  RealVector eigenvalues;
  QOperator eigenvectors;
};

/// Physicality diagnostics of a (would-be) density matrix.
struct DensityAudit {
  double trace_error = 0.0;         // |Tr rho - 1|
  double hermiticity_error = 0.0;   // max_ij |rho_ij - conj(rho_ji)|
  double min_eigenvalue = 0.0;
  RealVector eigenvalues;           // ascending, of the Hermitian part
};

struct SanitizedDensity {
  QOperator rho;
  DensityAudit audit;  // audit of the input before symmetrisation/renormalisation
  bool flagged = false;  // some eigenvalue < -tol (not clipped)
};

// Hard limits beyond which sanitize_density refuses the state.
inline constexpr double kHardTraceLimit = 1e-4;
inline constexpr double kHardEigenvalueLimit = 1e-4;

QOperator identity(Index dim);
QOperator kron(const QOperator& a, const QOperator& b);

/// Matrix unit |row><col| on a space of dimension dim.
QOperator basis_op(Index dim, Index row, Index col);

/// Truncated annihilation operator: a|n> = sqrt(n)|n-1>.
QOperator annihilation(Index dim);
QOperator number_operator(Index dim);

/// Reduced state on `keep`. Throws DimensionError when rho is not (dims.total())^2.
QOperator partial_trace(const QOperator& rho, Subsystem keep, SubsystemDims dims);

/// Throws DomainError when h is not Hermitian within 1e-10 (elementwise).
Spectrum hermitian_eig(const QOperator& h);
RealVector hermitian_eigenvalues(const QOperator& h);

double hermiticity_error(const QOperator& m);
DensityAudit audit_density(const QOperator& rho);

/// (rho + rho^dagger)/2 renormalised to unit trace. Eigenvalues below -tol are
/// flagged, never clipped. Throws IntegrationFailure when the trace deviates by
/// more than 1e-4 or an eigenvalue is below -1e-4.
SanitizedDensity sanitize_density(const QOperator& rho, double tol = 1e-8);

/// Throws DomainError unless rho satisfies the density-matrix invariants
/// (trace within 1e-8, Hermitian within 1e-10, min eigenvalue >= -1e-8).
void require_density(const QOperator& rho, const char* what);

/// Truncated coherent state e^{-|a|^2/2} a^n/sqrt(n!), renormalised after
/// truncation. Emits a warning if |alpha|^2 > dim - 6|alpha|.
StateVector coherent_vector(Complex alpha, Index dim, Warnings* warnings = nullptr);

double expectation(const QOperator& rho, const QOperator& op);

/// V diag(f(lambda)) V^dagger.
template <class F>
QOperator spectral_function(const Spectrum& s, F&& f) {
  RealVector mapped(s.eigenvalues.size());
  for (Index k = 0; k < mapped.size(); ++k) mapped[k] = f(s.eigenvalues[k]);
  return s.eigenvectors * mapped.asDiagonal() * s.eigenvectors.adjoint();
}

}  // namespace maser
