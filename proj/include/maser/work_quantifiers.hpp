#pragma once

// Energetic and free-energy decomposition of a state relative to a Hamiltonian:
//   E = W + E_pas = W + W_bound + E_th,   F^T = E - T S = W + W_bound + F^T(rho_th).

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maser/operator_core.hpp"

namespace maser {

/// -sum lambda ln lambda; eigenvalues below 1e-14 contribute zero. Throws
/// DomainError on an eigenvalue below -1e-8.
double von_neumann_entropy(const QOperator& rho);
double entropy_from_eigenvalues(std::span<const double> eigenvalues);

/// Passive state: eigenvalues of rho sorted descending (stable) placed on the
/// eigenvectors of h in ascending energy order.
QOperator passive_state(const QOperator& rho, const QOperator& h);
double ergotropy(const QOperator& rho, const QOperator& h);
/// sum_k r_k epsilon_k with r descending, epsilon ascending.
double passive_energy(std::span<const double> rho_eigenvalues, std::span<const double> energies);

/// e^{-h/T}/Z. Throws DomainError for T <= 0.
QOperator gibbs_state(const QOperator& h, double T);

/// Thermal populations and entropy on a fixed set of energy levels.
std::vector<double> gibbs_populations(std::span<const double> levels, double T);
double gibbs_entropy(std::span<const double> levels, double T);
double gibbs_energy(std::span<const double> levels, double T);

inline constexpr double kMinMatchTemperature = 1e-6;

struct EntropyMatch {
  double temperature = 0.0;
  double energy = 0.0;   // thermal energy on the matching levels
  bool clamped = false;  // target at or below S(T_min): reported at T_min
};

/// Bisection for S(gibbs(levels, T)) = s_target, |error| < 1e-9.
/// Throws DomainError when s_target < 0 or s_target >= ln(levels) - 1e-9.
EntropyMatch match_entropy_levels(std::span<const double> levels, double s_target);

/// Operator form: returns the temperature and the matched Gibbs state of h.
std::pair<double, QOperator> match_entropy_temperature(const QOperator& h, double s_target);

struct LedgerOptions {
  /// Energy ladder for the entropy-matched thermal reference. Empty: the
  /// eigenvalues of h. A longer ladder lets a truncated oscillator's thermal
  /// reference extend beyond the state's own truncation.
  std::vector<double> reference_levels;
  /// When set, the top five populations of the matched Gibbs state must stay
  /// below guard_limit; otherwise DomainError ("truncation inadequate").
  bool truncation_guard = false;
  double guard_limit = 1e-7;
};

struct WorkLedger {
  double E = 0.0;
  double W = 0.0;
  double W_bound = 0.0;
  double E_th = 0.0;
  double E_pas = 0.0;
  double S = 0.0;
  double T_match = 0.0;
  std::vector<std::pair<double, double>> F;  // (temperature, E - T S)

  double W_total() const { return W + W_bound; }
  /// Free energy for a temperature passed to ledger(); throws otherwise.
  double free_energy(double T) const;
};

WorkLedger ledger(const QOperator& rho, const QOperator& h, std::span<const double> temps,
                  const LedgerOptions& options = {});
/// Same decomposition from precomputed spectra (ascending) and <h>.
WorkLedger ledger_from_spectra(double energy, std::span<const double> rho_eigenvalues,
                               std::span<const double> h_eigenvalues,
                               std::span<const double> temps, const LedgerOptions& options = {});

struct FreeEnergyTerms {
  double W = 0.0;
  double W_bound = 0.0;
  double F_thermal = 0.0;  // F^T of the entropy-matched Gibbs state
  double total() const { return W + W_bound + F_thermal; }
};

FreeEnergyTerms free_energy_decomposition(const QOperator& rho, const QOperator& h, double T);

struct NonExtensivity {
  double W_single = 0.0;
  double W_two_copy_per_copy = 0.0;
  double gap() const { return W_two_copy_per_copy - W_single; }
};

/// Ergotropy of rho (x) rho under h(x)1 + 1(x)h, per copy. dim(rho) <= 8.
NonExtensivity non_extensivity_check(const QOperator& rho, const QOperator& h);

struct LandscapePoint {
  double energy = 0.0;
  double temperature = 0.0;  // of the Gibbs state with this mean energy
  double thermal_F = 0.0;    // E - T_ref S(gibbs)
  double pure_F = 0.0;       // E (zero entropy)
};

struct Landscape {
  std::vector<LandscapePoint> points;
  Warnings warnings;  // one per omitted grid energy
};

/// Thermal floor and pure-state ceiling of F^{T_ref} versus energy.
Landscape free_energy_landscape(const QOperator& h, double T_ref, std::span<const double> energy_grid);
Landscape free_energy_landscape_levels(std::span<const double> levels, double T_ref,
                                       std::span<const double> energy_grid);

}  // namespace maser
