#include "maser/maser_model.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace maser {

namespace {

constexpr Complex kI{0.0, 1.0};

// Jump operator |to><from| with its rate (the gamma (n+1) or gamma n prefactor).
struct Jump {
  Index to;
  Index from;
  double rate;
};

std::array<Jump, 2> bath_jumps(Bath bath, const EngineParams& p, double n_h, double n_c) {
  if (bath == Bath::Hot) return {{{0, 2, p.gamma_h * (n_h + 1.0)}, {2, 0, p.gamma_h * n_h}}};
  return {{{1, 2, p.gamma_c * (n_c + 1.0)}, {2, 1, p.gamma_c * n_c}}};
}

}  // namespace

void EngineParams::validate() const {
  auto fail = [](const std::string& what) { throw DomainError("EngineParams: " + what); };
  if (!(omega1 >= 0.0)) fail("omega1 must be >= 0");
  if (!(omega2 > omega1)) fail("omega2 must exceed omega1");
  if (!(omega3 > omega2)) fail("omega3 must exceed omega2");
  if (!(std::abs(omega_f - (omega2 - omega1)) <= 1e-12 * std::max(1.0, std::abs(omega_f))))
    fail("omega_f must equal omega2 - omega1 (resonance)");
  if (!(T_c > 0.0)) fail("T_c must be > 0");
  if (!(T_h > T_c)) fail("T_h must exceed T_c");
  if (!(gamma_c > 0.0) || !(gamma_h > 0.0)) fail("bath rates must be > 0");
  if (!(g >= 0.0)) fail("coupling g must be >= 0");
  if (n_field < 1) fail("n_field must be a positive integer");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Below: return "below";
    case Regime::At: return "at";
    case Regime::Above: return "above";
  }
  return "?";
}

std::string to_string(Bath b) { return b == Bath::Hot ? "hot" : "cold"; }
std::string to_string(Frame f) { return f == Frame::Lab ? "lab" : "rotating"; }

Frame frame_from_string(const std::string& s) {
  if (s == "lab") return Frame::Lab;
  if (s == "rotating") return Frame::Rotating;
  throw DomainError("unknown frame '" + s + "' (expected lab|rotating)");
}

double thermal_occupation(double omega, double T) {
  if (!(omega > 0.0)) throw DomainError("thermal_occupation: omega must be > 0");
  if (!(T > 0.0)) throw DomainError("thermal_occupation: T must be > 0");
  return 1.0 / std::expm1(omega / T);
}

QOperator atom_transition(const EngineParams& p, int to_level, int from_level) {
  return kron(basis_op(3, to_level - 1, from_level - 1), identity(p.n_field));
}

QOperator build_free_hamiltonian(const EngineParams& p) {
  p.validate();
  QOperator atom = QOperator::Zero(3, 3);
  atom(0, 0) = p.omega1;
  atom(1, 1) = p.omega2;
  atom(2, 2) = p.omega3;
  return kron(atom, identity(p.n_field)) + kron(identity(3), field_hamiltonian(p));
}

QOperator build_jc_hamiltonian(const EngineParams& p) {
  p.validate();
  const QOperator a = annihilation(p.n_field);
  const QOperator sigma_minus = basis_op(3, 0, 1);
  const QOperator sigma_plus = basis_op(3, 1, 0);
  return p.g * (kron(sigma_minus, a.adjoint()) + kron(sigma_plus, a));
}

QOperator build_hamiltonian(const EngineParams& p) {
  return build_free_hamiltonian(p) + build_jc_hamiltonian(p);
}

QOperator field_hamiltonian(const EngineParams& p) {
  return p.omega_f * number_operator(p.n_field);
}

QOperator dissipator_apply(const QOperator& A, const QOperator& rho) {
  if (A.rows() != rho.rows() || A.cols() != rho.cols() || rho.rows() != rho.cols())
    throw DimensionError("dissipator_apply: dimension mismatch");
  const QOperator AdA = A.adjoint() * A;
  return 2.0 * A * rho * A.adjoint() - AdA * rho - rho * AdA;
}

QOperator liouvillian(Bath bath, const QOperator& rho, const EngineParams& p) {
  const MasterEquation eq(p, Frame::Rotating);
  if (rho.rows() != p.dim() || rho.cols() != p.dim())
    throw DimensionError("liouvillian: state dimension does not match 3 x n_field");
  QOperator out = QOperator::Zero(rho.rows(), rho.cols());
  eq.add_dissipation(bath, rho, out);
  return out;
}

QOperator master_rhs(const QOperator& rho, const EngineParams& p, Frame frame) {
  const MasterEquation eq(p, frame);
  if (rho.rows() != p.dim() || rho.cols() != p.dim())
    throw DimensionError("master_rhs: state dimension does not match 3 x n_field");
  QOperator out;
  eq.rhs(rho, out);
  return out;
}

Regime classify_regime(const EngineParams& p) {
  p.validate();
  const double cold = p.omega_c() / p.T_c;
  const double hot = p.omega_h() / p.T_h;
  if (std::abs(cold - hot) <= 1e-12 * std::max(std::abs(cold), std::abs(hot))) return Regime::At;
  return cold < hot ? Regime::Below : Regime::Above;
}

double effective_temperature(const EngineParams& p) {
  const Regime r = classify_regime(p);
  if (r != Regime::Below)
    throw DomainError("effective_temperature: defined only below threshold (regime is " +
                      to_string(r) + ")");
  return p.omega_f / (p.omega_h() / p.T_h - p.omega_c() / p.T_c);
}

MasterEquation::MasterEquation(const EngineParams& p, Frame frame)
    : params_(p), frame_(frame), nf_(p.n_field) {
  p.validate();
  n_h_ = thermal_occupation(p.omega_h(), p.T_h);
  n_c_ = thermal_occupation(p.omega_c(), p.T_c);
  sqrt_n_.resize(static_cast<std::size_t>(nf_ + 1));
  for (Index n = 0; n <= nf_; ++n) sqrt_n_[static_cast<std::size_t>(n)] = std::sqrt(double(n));
  free_energy_.resize(3 * nf_);
  const double levels[3] = {p.omega1, p.omega2, p.omega3};
  for (Index i = 0; i < 3; ++i)
    for (Index n = 0; n < nf_; ++n) free_energy_[i * nf_ + n] = levels[i] + p.omega_f * double(n);
}

void MasterEquation::rhs(const QOperator& rho, QOperator& out) const {
  // Single pass over output columns. Every jump |to><from| damps the rows and
  // columns of level `from` and feeds block (to,to) from block (from,from);
  // H_JC couples block 0 <-> block 1 through the ladder operators.
  const Index N = nf_;
  const Index D = 3 * N;
  out.resize(D, D);
  double loss[3] = {0.0, 0.0, 0.0};
  double gain[3][3] = {};  // gain[to][from]
  for (Bath b : {Bath::Hot, Bath::Cold})
    for (const Jump& j : bath_jumps(b, params_, n_h_, n_c_)) {
      loss[j.from] += j.rate;
      gain[j.to][j.from] += 2.0 * j.rate;
    }
  const Complex mig = -kI * params_.g;
  const double* s = sqrt_n_.data();
  const bool lab = frame_ == Frame::Lab;

  for (Index bj = 0; bj < 3; ++bj) {
    for (Index mc = 0; mc < N; ++mc) {
      const Index c = bj * N + mc;
      const Complex* src = rho.data() + c * D;
      Complex* dst = out.data() + c * D;
      for (Index bi = 0; bi < 3; ++bi) {
        const double k = -(loss[bi] + loss[bj]);
        for (Index m = 0; m < N; ++m) dst[bi * N + m] = k * src[bi * N + m];
      }
      // population feeding into the diagonal block of this column
      for (Index bf = 0; bf < 3; ++bf) {
        const double gr = gain[bj][bf];
        if (gr == 0.0) continue;
        const Complex* from = rho.data() + (bf * N + mc) * D + bf * N;
        for (Index m = 0; m < N; ++m) dst[bj * N + m] += gr * from[m];
      }
      // -i H_JC rho
      for (Index m = 1; m < N; ++m) dst[m] += mig * s[m] * src[N + m - 1];
      for (Index m = 0; m + 1 < N; ++m) dst[N + m] += mig * s[m + 1] * src[m + 1];
      // +i rho H_JC
      if (bj == 1 && mc + 1 < N) {
        const Complex f = -mig * s[mc + 1];
        const Complex* other = rho.data() + (mc + 1) * D;
        for (Index r = 0; r < D; ++r) dst[r] += f * other[r];
      } else if (bj == 0 && mc >= 1) {
        const Complex f = -mig * s[mc];
        const Complex* other = rho.data() + (N + mc - 1) * D;
        for (Index r = 0; r < D; ++r) dst[r] += f * other[r];
      }
      if (lab) {
        const double ec = free_energy_[c];
        for (Index r = 0; r < D; ++r) dst[r] += -kI * (free_energy_[r] - ec) * src[r];
      }
    }
  }
}

void MasterEquation::add_dissipation(Bath bath, const QOperator& rho, QOperator& out) const {
  const Index N = nf_;
  for (const Jump& j : bath_jumps(bath, params_, n_h_, n_c_)) {
    if (j.rate == 0.0) continue;
    out.block(j.to * N, j.to * N, N, N) += 2.0 * j.rate * rho.block(j.from * N, j.from * N, N, N);
    out.middleRows(j.from * N, N) -= j.rate * rho.middleRows(j.from * N, N);
    out.middleCols(j.from * N, N) -= j.rate * rho.middleCols(j.from * N, N);
  }
}

}  // namespace maser
