#include "doctest.h"

#include <cmath>
#include <sstream>

#include "maser/field_optics.hpp"
#include "support.hpp"

using namespace maser;

namespace {

QOperator fock(Index dim, Index n) { return basis_op(dim, n, n); }

QOperator thermal(Index dim, double mean) {
  const double q = mean / (1.0 + mean);
  QOperator rho = QOperator::Zero(dim, dim);
  double z = 0.0;
  for (Index n = 0; n < dim; ++n) z += std::pow(q, double(n));
  for (Index n = 0; n < dim; ++n) rho(n, n) = std::pow(q, double(n)) / z;
  return rho;
}

}  // namespace

TEST_CASE("photon statistics") {
  for (Index n = 1; n < 8; ++n) {
    const PhotonStats s = photon_stats(fock(12, n));
    REQUIRE(s.g2.has_value());
    CHECK(*s.g2 == doctest::Approx(1.0 - 1.0 / double(n)));
  }
  const PhotonStats th = photon_stats(thermal(60, 3.0));
  CHECK(std::abs(*th.g2 - 2.0) < 1e-3);
  const PhotonStats po = photon_stats(poisson_state(9.0, 60));
  CHECK(std::abs(*po.g2 - 1.0) < 1e-6);
  double total = 0.0;
  for (double p : po.distribution) total += p;
  CHECK(std::abs(total - 1.0) < 1e-10);
  CHECK_FALSE(photon_stats(fock(5, 0)).g2.has_value());
}

TEST_CASE("Q function") {
  const QGridSpec spec = QGridSpec::around(0.0, 41);
  const QGrid vac = q_function(fock(30, 0), spec);
  for (int j = 0; j < 41; ++j)
    for (int i = 0; i < 41; ++i) {
      const double r2 = spec.re_at(i) * spec.re_at(i) + spec.im_at(j) * spec.im_at(j);
      CHECK(std::abs(vac.values(j, i) - std::exp(-r2) / M_PI) < 1e-8);
    }
  CHECK(std::abs(vac.integral() - 1.0) < 0.02);

  const QOperator pac = phase_averaged_coherent(2.0, 40, default_phase_count(40));
  // Points on a circle of radius 1.5 at several angles.
  QGridSpec one;
  one.resolution = 1;
  double ref = -1.0;
  for (int k = 0; k < 12; ++k) {
    const double phi = 0.37 + 2.0 * M_PI * k / 12.0;
    one.re_min = one.re_max = 1.5 * std::cos(phi);
    one.im_min = one.im_max = 1.5 * std::sin(phi);
    const double q = q_function(pac, one).values(0, 0);
    if (ref < 0.0) ref = q;
    CHECK(std::abs(q - ref) < 1e-10);
  }

  std::mt19937 rng(17);
  QOperator rho = QOperator::Zero(40, 40);
  rho.topLeftCorner(8, 8) = testsupport::random_density(rng, 8);
  const QGrid g = q_function(rho, QGridSpec::around(photon_stats(rho).mean, 101));
  CHECK(g.values.minCoeff() >= -1e-12);
  CHECK(std::abs(g.integral() - 1.0) < 0.02);
}

TEST_CASE("Q grid CSV round trip") {
  const QGrid g = q_function(poisson_state(2.0, 30), QGridSpec::around(2.0, 9));
  std::stringstream ss;
  g.write_csv(ss);
  const QGrid back = QGrid::read_csv(ss);
  CHECK(back.spec.re_min == g.spec.re_min);
  CHECK(back.spec.im_max == g.spec.im_max);
  CHECK(back.spec.resolution == 9);
  CHECK(back.values == g.values);

  std::stringstream bad("1,2,3\n");
  CHECK_THROWS_AS(QGrid::read_csv(bad), DomainError);
}

TEST_CASE("Poissonian and phase-averaged states") {
  CHECK(testsupport::max_abs(poisson_state(0.0, 10) - fock(10, 0)) == 0.0);
  const QOperator p = poisson_state(4.0, 40);
  CHECK(p(3, 3).real() == doctest::Approx(64.0 * std::exp(-4.0) / 6.0).epsilon(1e-12));
  CHECK(p(3, 3).real() == doctest::Approx(0.19537).epsilon(1e-5));
  CHECK(std::abs(photon_stats(poisson_state(17.3, 80)).mean - 17.3) < 1e-9);

  const QOperator pac = phase_averaged_coherent(3.0, 40, default_phase_count(40));
  CHECK(testsupport::max_abs(pac - poisson_state(9.0, 40)) < 1e-8);

  CHECK_THROWS_AS(poisson_state(35.0, 40), DomainError);
  CHECK_THROWS_AS(poisson_state(-1.0, 40), DomainError);
  CHECK_THROWS_AS(phase_averaged_coherent(1.0, 10, 32), DomainError);
}

TEST_CASE("Gaussian laser closed forms") {
  const GaussianLaserAnalytics g = gaussian_laser_analytics(46.8, 30.0, 100.0);
  CHECK(g.E == doctest::Approx(1404.0));
  const double alpha = std::sqrt(46.8);
  CHECK(g.E_pas == doctest::Approx(2.0 * std::sqrt(2.0 / M_PI) * 30.0 * alpha - 15.0));
  CHECK(g.E_pas == doctest::Approx(312.48).epsilon(1e-4));
  CHECK(g.S == doctest::Approx(3.34189).epsilon(5e-6));
  CHECK(g.F == doctest::Approx(1069.81).epsilon(5e-6));
  CHECK_THROWS_AS(gaussian_laser_analytics(0.5, 30.0, 100.0), DomainError);
}

TEST_CASE("closed forms against the exact truncated Poissonian state") {
  const std::vector<double> temps = {100.0};
  for (double a2 : {30.0, 40.0, 46.8, 60.0}) {
    CAPTURE(a2);
    const Index dim = 130;
    const QOperator rho = poisson_state(a2, dim);
    const WorkLedger l = ledger(rho, 30.0 * number_operator(dim), temps);
    const GaussianLaserAnalytics g = gaussian_laser_analytics(a2, 30.0, 100.0);
    CHECK(std::abs(l.E_pas - g.E_pas) < 0.02 * g.E_pas);
    CHECK(std::abs(l.S - g.S) < 0.01 * g.S);
  }
}

TEST_CASE("classical-limit efficiencies") {
  const ClassicalLimitEfficiencies e = classical_limit_efficiencies(1404.0, 30.0, 100.0, 0.2);
  CHECK(e.eta_W == doctest::Approx(0.17670).epsilon(1e-4));
  CHECK(e.eta_F == doctest::Approx(0.19288).epsilon(1e-4));
  const ClassicalLimitEfficiencies big = classical_limit_efficiencies(1e12, 30.0, 100.0, 0.2);
  CHECK(std::abs(big.eta_W - 0.2) < 1e-5 * 0.2);
  CHECK(std::abs(big.eta_F - 0.2) < 1e-5 * 0.2);
  double w = -1.0, f = -1.0;
  for (double E = 40.0; E < 1e6; E *= 1.5) {
    const ClassicalLimitEfficiencies x = classical_limit_efficiencies(E, 30.0, 100.0, 0.2);
    CHECK(x.eta_W > w);
    CHECK(x.eta_F > f);
    CHECK(x.eta_W < 0.2);
    CHECK(x.eta_F < 0.2);
    w = x.eta_W, f = x.eta_F;
  }
  CHECK_THROWS_AS(classical_limit_efficiencies(0.0, 30.0, 100.0, 0.2), DomainError);
}

TEST_CASE("field ledger extends the thermal reference beyond the truncation") {
  const QOperator rho = poisson_state(46.8, 110);
  const std::vector<double> temps = {100.0};
  const WorkLedger l = field_ledger(rho, 30.0, temps);
  CHECK(l.W_bound > 0.0);
  CHECK(std::abs(l.E - (l.W + l.W_bound + l.E_th)) < 1e-8);
  // Thermal oscillator on the untruncated ladder with the same entropy.
  const double n_th = [&] {
    double lo = 0.0, hi = 100.0;
    for (int k = 0; k < 200; ++k) {
      const double m = 0.5 * (lo + hi);
      const double s = (m + 1.0) * std::log(m + 1.0) - m * std::log(m);
      (s < l.S ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
  }();
  CHECK(l.E_th == doctest::Approx(30.0 * n_th).epsilon(1e-6));
}
