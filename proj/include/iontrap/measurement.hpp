#pragma once

// Reduced states, ideal conditional projection on internal levels, and
// scalar observables. Quadrature convention: X_θ = (â e^{−iθ} + â† e^{iθ})/√2,
// vacuum variance ½.

#include "iontrap/hilbert.hpp"

#include <vector>

namespace iontrap {

/// A tensor factor: a mode (by label) or the internal levels.
struct Subsystem {
  bool internal = false;
  char label = 'x';

  static Subsystem mode(char label) { return {false, label}; }
  static Subsystem internal_levels() { return {true, '\0'}; }
};

DensityOperator pure_density(const StateVector& state);

/// Partial trace onto `keep` (factor order of the result follows the space).
DensityOperator reduce(const StateVector& state, std::span<const Subsystem> keep);
DensityOperator reduce(const DensityOperator& rho, std::span<const Subsystem> keep);
DensityOperator reduce(const StateVector& state, Subsystem keep);
DensityOperator reduce(const DensityOperator& rho, Subsystem keep);

struct MeasurementRecord {
  Level outcome = Level::a;
  double probability = 0.0;
  StateVector post_state;  ///< normalized, on the vibrational factors only
};

/// Ideal projection onto `level`. Throws std::domain_error when the outcome
/// has (numerically) zero probability.
MeasurementRecord project_internal(const StateVector& state, Level level,
                                   double min_probability = 1e-14);

/// ⟨P_a⟩ − ⟨P_b⟩.
double atomic_inversion(const StateVector& state);
/// Same quantity through the reduced internal density operator.
double atomic_inversion(const DensityOperator& internal_rho);

/// Fock populations of a single-mode density operator.
RealVector number_distribution(const DensityOperator& rho);
double mean_number(const DensityOperator& rho);

double quadrature_variance(const DensityOperator& rho, double theta);

struct Squeezing {
  double variance = 0.5;
  double theta = 0.0;
};
/// Minimum over θ: ½ + ⟨Δâ†Δâ⟩ − |⟨Δâ²⟩|.
Squeezing optimal_quadrature_variance(const DensityOperator& rho);

double purity(const DensityOperator& rho);
/// |⟨target|ψ⟩|² (normalized inputs).
double fidelity(const StateVector& state, const StateVector& target);
/// ⟨target|ρ|target⟩.
double fidelity(const DensityOperator& rho, const StateVector& target);
/// Uhlmann fidelity (Tr √(√ρ σ √ρ))².
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);

/// Strict local maxima above `floor` on the residue class k ≡ r (mod stride)
/// carrying the most weight. stride > 1 looks past selection-rule zeros.
std::size_t count_local_maxima(const RealVector& p, std::size_t stride = 1, double floor = 1e-4);

/// Expectation ⟨Π⟩ of the parity operator (−1)^n̂.
double parity_expectation(const DensityOperator& rho);

}  // namespace iontrap
