#pragma once

// Hand-rolled generators for property tests.

#include <cmath>
#include <random>

#include "maser/operator_core.hpp"

namespace testsupport {

using maser::Complex;
using maser::Index;
using maser::QOperator;

inline QOperator random_matrix(std::mt19937& rng, Index d) {
  std::normal_distribution<double> n(0.0, 1.0);
  QOperator m(d, d);
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c) m(r, c) = Complex(n(rng), n(rng));
  return m;
}

inline QOperator random_hermitian(std::mt19937& rng, Index d) {
  const QOperator m = random_matrix(rng, d);
  return 0.5 * (m + m.adjoint());
}

/// Full-rank density matrix G G^dagger / Tr.
inline QOperator random_density(std::mt19937& rng, Index d) {
  const QOperator g = random_matrix(rng, d);
  QOperator rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// Mixture with a random pure state, pushing the spectrum away from uniform.
inline QOperator random_skewed_density(std::mt19937& rng, Index d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const QOperator mixed = random_density(rng, d);
  const QOperator g = random_matrix(rng, d);
  maser::StateVector v = g.col(0);
  v.normalize();
  const double w = u(rng);
  return w * (v * v.adjoint()) + (1.0 - w) * mixed;
}

inline QOperator random_unitary(std::mt19937& rng, Index d) {
  Eigen::HouseholderQR<QOperator> qr(random_matrix(rng, d));
  return qr.householderQ();
}

inline QOperator diag(std::initializer_list<double> values) {
  QOperator m = QOperator::Zero(Index(values.size()), Index(values.size()));
  Index k = 0;
  for (double v : values) m(k, k) = v, ++k;
  return m;
}

inline double max_abs(const QOperator& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testsupport
