#pragma once

// Heat-pumped three-level maser: atom levels |1>,|2>,|3> (indices 0,1,2) with
// the 1<->2 transition resonantly coupled to a single cavity mode. Units:
// hbar = k_B = gamma_h = 1.

#include <string>
#include <vector>

#include "maser/operator_core.hpp"

namespace maser {

struct EngineParams {
  double omega1 = 0.0;
  double omega2 = 30.0;
  double omega3 = 150.0;
  double omega_f = 30.0;
  double g = 5.0;
  double gamma_c = 1.0;
  double gamma_h = 1.0;
  double T_c = 20.0;
  double T_h = 100.0;
  int n_field = 40;

  double omega_h() const { return omega3 - omega1; }
  double omega_c() const { return omega3 - omega2; }
  Index dim() const { return 3 * static_cast<Index>(n_field); }
  SubsystemDims dims() const { return {3, static_cast<Index>(n_field)}; }

  /// Throws DomainError naming the first violated invariant.
  void validate() const;

  bool operator==(const EngineParams&) const = default;
};

enum class Regime { Below, At, Above };
enum class Bath { Hot, Cold };
enum class Frame { Lab, Rotating };

std::string to_string(Regime r);
std::string to_string(Bath b);
std::string to_string(Frame f);
Frame frame_from_string(const std::string& s);

/// Bose-Einstein occupation 1/(e^{omega/T} - 1).
double thermal_occupation(double omega, double T);

/// H_free + H_JC on the joint space.
QOperator build_hamiltonian(const EngineParams& p);
QOperator build_free_hamiltonian(const EngineParams& p);
QOperator build_jc_hamiltonian(const EngineParams& p);
/// omega_f a^dagger a on the field space alone.
QOperator field_hamiltonian(const EngineParams& p);

/// Atom operator |i><j| (levels 1..3) tensored with the field identity.
QOperator atom_transition(const EngineParams& p, int to_level, int from_level);

/// 2 A rho A^dagger - A^dagger A rho - rho A^dagger A (no factor 1/2).
QOperator dissipator_apply(const QOperator& A, const QOperator& rho);

/// L_bath rho for the local hot (1<->3) or cold (2<->3) Liouvillian.
QOperator liouvillian(Bath bath, const QOperator& rho, const EngineParams& p);

/// d rho/dt. Rotating frame (interaction picture w.r.t. H_free) keeps only H_JC
/// in the commutator; lab frame uses the full Hamiltonian.
QOperator master_rhs(const QOperator& rho, const EngineParams& p, Frame frame);

Regime classify_regime(const EngineParams& p);
/// omega_f / (omega_h/T_h - omega_c/T_c); throws DomainError at or above threshold.
double effective_temperature(const EngineParams& p);

/// Precomputed generator that evaluates d rho/dt block-wise in O(N^2) using
/// the sparsity of the ladder and jump operators. master_rhs delegates here.
class MasterEquation {
 public:
  MasterEquation(const EngineParams& p, Frame frame);

  void rhs(const QOperator& rho, QOperator& out) const;
  /// Adds L_bath rho into out.
  void add_dissipation(Bath bath, const QOperator& rho, QOperator& out) const;

  const EngineParams& params() const { return params_; }
  Frame frame() const { return frame_; }
  double n_hot() const { return n_h_; }
  double n_cold() const { return n_c_; }

 private:
  EngineParams params_;
  Frame frame_;
  Index nf_;
  double n_h_;
  double n_c_;
  std::vector<double> sqrt_n_;   // sqrt(n), n = 0..N
  RealVector free_energy_;       // diagonal of H_free in the joint basis
};

}  // namespace maser
