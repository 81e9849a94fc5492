#include "maser/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace maser {

namespace {

void require_square(const QOperator& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": operator is " << m.rows() << "x" << m.cols() << ", expected square";
    throw DimensionError(os.str());
  }
}

// Eigen's solver already returns ascending values; the stable pass pins the
// tie order so that downstream pairings never depend on solver internals.
Spectrum sorted_spectrum(const RealVector& values, const QOperator& vectors) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values[a] < values[b]; });
  Spectrum s;
  s.eigenvalues.resize(values.size());
  s.eigenvectors.resize(vectors.rows(), vectors.cols());
  for (Index k = 0; k < values.size(); ++k) {
    s.eigenvalues[k] = values[order[static_cast<std::size_t>(k)]];
    s.eigenvectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  return s;
}

}  // namespace

QOperator identity(Index dim) { return QOperator::Identity(dim, dim); }

QOperator kron(const QOperator& a, const QOperator& b) {
  QOperator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

QOperator basis_op(Index dim, Index row, Index col) {
  if (row < 0 || col < 0 || row >= dim || col >= dim)
    throw DimensionError("basis_op: index outside the space");
  QOperator m = QOperator::Zero(dim, dim);
  m(row, col) = 1.0;
  return m;
}

QOperator annihilation(Index dim) {
  QOperator a = QOperator::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

QOperator number_operator(Index dim) {
  QOperator n = QOperator::Zero(dim, dim);
  for (Index k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

QOperator partial_trace(const QOperator& rho, Subsystem keep, SubsystemDims dims) {
  require_square(rho, "partial_trace");
  if (dims.atom <= 0 || dims.field <= 0 || rho.rows() != dims.total()) {
    std::ostringstream os;
    os << "partial_trace: operator dimension " << rho.rows() << " does not match "
       << dims.atom << "x" << dims.field;
    throw DimensionError(os.str());
  }
  const Index na = dims.atom;
  const Index nf = dims.field;
  if (keep == Subsystem::Field) {
    QOperator out = QOperator::Zero(nf, nf);
    for (Index i = 0; i < na; ++i) out += rho.block(i * nf, i * nf, nf, nf);
    return out;
  }
  QOperator out(na, na);
  for (Index i = 0; i < na; ++i)
    for (Index j = 0; j < na; ++j) out(i, j) = rho.block(i * nf, j * nf, nf, nf).trace();
  return out;
}

double hermiticity_error(const QOperator& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Spectrum hermitian_eig(const QOperator& h) {
  require_square(h, "hermitian_eig");
  const double herr = h.size() == 0 ? 0.0 : hermiticity_error(h);
  if (herr > 1e-10) {
    std::ostringstream os;
    os << "hermitian_eig: operator is not Hermitian (max deviation " << herr << ")";
    throw DomainError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<QOperator> solver(h);
  if (solver.info() != Eigen::Success) throw DomainError("hermitian_eig: solver did not converge");
  return sorted_spectrum(solver.eigenvalues(), solver.eigenvectors());
}

RealVector hermitian_eigenvalues(const QOperator& h) {
  require_square(h, "hermitian_eigenvalues");
  Eigen::SelfAdjointEigenSolver<QOperator> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw DomainError("hermitian_eigenvalues: solver did not converge");
  RealVector values = solver.eigenvalues();
  std::stable_sort(values.data(), values.data() + values.size());
  return values;
}

DensityAudit audit_density(const QOperator& rho) {
  require_square(rho, "audit_density");
  DensityAudit audit;
  audit.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  audit.hermiticity_error = hermiticity_error(rho);
  const QOperator herm = 0.5 * (rho + rho.adjoint());
  audit.eigenvalues = hermitian_eigenvalues(herm);
  audit.min_eigenvalue = audit.eigenvalues.size() ? audit.eigenvalues[0] : 0.0;
  return audit;
}

SanitizedDensity sanitize_density(const QOperator& rho, double tol) {
  SanitizedDensity out;
  out.audit = audit_density(rho);
  if (out.audit.trace_error > kHardTraceLimit) {
    std::ostringstream os;
    os << "integration failure: trace deviates from 1 by " << out.audit.trace_error
       << " (step too large or truncation too small)";
    throw IntegrationFailure(os.str());
  }
  if (out.audit.min_eigenvalue < -kHardEigenvalueLimit) {
    std::ostringstream os;
    os << "integration failure: eigenvalue " << out.audit.min_eigenvalue
       << " below -1e-4 (step too large or truncation too small)";
    throw IntegrationFailure(os.str());
  }
  out.flagged = out.audit.min_eigenvalue < -tol;
  out.rho = 0.5 * (rho + rho.adjoint());
  const double tr = out.rho.trace().real();
  out.rho /= tr;
  out.audit.eigenvalues /= tr;
  return out;
}

void require_density(const QOperator& rho, const char* what) {
  require_square(rho, what);
  const DensityAudit a = audit_density(rho);
  if (a.trace_error > 1e-8 || a.hermiticity_error > 1e-10 || a.min_eigenvalue < -1e-8) {
    std::ostringstream os;
    os << what << ": not a density matrix (trace error " << a.trace_error
       << ", hermiticity error " << a.hermiticity_error << ", min eigenvalue "
       << a.min_eigenvalue << ")";
    throw DomainError(os.str());
  }
}

StateVector coherent_vector(Complex alpha, Index dim, Warnings* warnings) {
  if (dim <= 0) throw DimensionError("coherent_vector: dimension must be positive");
  const double r = std::abs(alpha);
  if (r * r > static_cast<double>(dim) - 6.0 * r) {
    std::ostringstream os;
    os << "coherent_vector: |alpha|^2 = " << r * r << " too large for " << dim
       << " Fock states";
    warn(warnings, os.str());
  }
  StateVector c(dim);
  c[0] = std::exp(-0.5 * r * r);
  for (Index n = 1; n < dim; ++n) c[n] = c[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  // Underflow of e^{-|a|^2/2} for huge amplitudes leaves an all-zero vector.
  const double norm = c.norm();
  if (norm == 0.0) throw DomainError("coherent_vector: amplitude underflow");
  return c / norm;
}

double expectation(const QOperator& rho, const QOperator& op) {
  if (rho.rows() != op.rows() || rho.cols() != op.cols())
    throw DimensionError("expectation: dimension mismatch");
  return (rho.cwiseProduct(op.transpose())).sum().real();
}

}  // namespace maser
