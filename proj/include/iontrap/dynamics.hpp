#pragma once

// Unitary evolution (ħ = 1) for static and time-dependent Hamiltonians.

#include "iontrap/hilbert.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iontrap {

enum class EvolutionMethod { eigendecomposition, scaled_exponential, stepped };

struct EvolutionConfig {
  EvolutionMethod method = EvolutionMethod::eigendecomposition;
  double dt = 1e-3;            ///< initial step (stepped only)
  double tolerance = 1e-8;     ///< terminal-state error target (stepped only)
  double leakage_gate = 1e-6;  ///< max probability in the top two levels of any mode
  double min_dt = 1e-7;

  void validate() const;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a sample exceeds the leakage gate.
class LeakageError : public std::runtime_error {
 public:
  LeakageError(const std::string& what, std::ptrdiff_t last_valid_index)
      : std::runtime_error(what), last_valid_index_(last_valid_index) {}
  /// Index of the last sample that passed the gate (−1 if none).
  std::ptrdiff_t last_valid_index() const { return last_valid_index_; }

 private:
  std::ptrdiff_t last_valid_index_;
};

/// exp(−iHt) for a Hermitian sparse H. The matrix is split into its
/// connected blocks (invariant subspaces read off the sparsity pattern) and
/// each block is diagonalized once, so the propagator is reused for any t.
/// Blocks larger than `max_eigen_block` fall back to scaled-and-squared
/// exponentials evaluated per call.
class StaticPropagator {
 public:
  explicit StaticPropagator(const Operator& h, EvolutionMethod method = EvolutionMethod::eigendecomposition,
                            Index max_eigen_block = 4000);

  Vector apply(const Vector& psi, double t) const;
  Index dim() const { return dim_; }
  std::size_t block_count() const { return blocks_.size(); }
  Index largest_block() const;

 private:
  struct Block {
    std::vector<Index> indices;
    RealVector energies;
    Matrix vectors;
    Matrix generator;  // dense block of H, scaled-exponential blocks only
    bool diagonalized = true;
  };
  Index dim_ = 0;
  std::vector<Block> blocks_;
};

StateVector evolve_static(const StateVector& state, const Operator& h, double t,
                          EvolutionMethod method = EvolutionMethod::eigendecomposition);

struct TimeDependentHamiltonian {
  HybridSpace space;
  std::function<Matrix(double)> at;
  std::optional<double> period;  ///< H(t + period) = H(t) when set

  static TimeDependentHamiltonian constant(const HybridSpace& space, const Operator& h);
};

/// Ordered exponential by midpoint exponentials exp(−iH(t+h/2)h), with the
/// one-period propagator reused for periodic handles.
class SteppedPropagator {
 public:
  SteppedPropagator(TimeDependentHamiltonian handle, double dt);

  Vector advance(const Vector& psi, double t0, double t1);
  double dt() const { return dt_; }

 private:
  Vector step_segment(Vector psi, double t0, double t1) const;
  const Matrix& period_unitary();

  TimeDependentHamiltonian handle_;
  double dt_;
  std::optional<Matrix> period_unitary_;
};

/// Stepped evolution from 0 to t_final. The step is halved until the
/// Richardson estimate ‖ψ_h − ψ_{h/2}‖/3 falls below cfg.tolerance; the finer
/// result is returned. Throws ConvergenceError below cfg.min_dt and
/// LeakageError when the final state breaks the leakage gate.
StateVector evolve_timedep(const StateVector& state, const TimeDependentHamiltonian& handle, double t_final,
                           const EvolutionConfig& cfg);

struct EvolutionDiagnostics {
  double final_dt = 0.0;
  double error_estimate = 0.0;
};

using ObservableFn = std::function<cplx(const StateVector&)>;

struct Observable {
  std::string name;
  ObservableFn fn;
};

/// ⟨ψ|O|ψ⟩ as an observable.
Observable expectation(std::string name, Operator op);

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::map<std::string, std::vector<cplx>> observables;
  EvolutionDiagnostics diagnostics;

  std::vector<double> real_series(const std::string& name) const;
};

/// Samples at ascending `times` (starting from t=0 for the initial state).
Trajectory trajectory(const StateVector& state, const Operator& h, std::span<const double> times,
                      const std::vector<Observable>& observables, const EvolutionConfig& cfg = {});
Trajectory trajectory(const StateVector& state, const TimeDependentHamiltonian& handle,
                      std::span<const double> times, const std::vector<Observable>& observables,
                      const EvolutionConfig& cfg);

/// Worst top-two-level probability over all modes.
double max_leakage(const StateVector& state);

enum class ChargeKind { K, L, pairdiff };

/// K = n·n̂_x + m·n̂_y;  L = n̂_x + m·|b⟩⟨b|;  pairdiff = n̂_x − n̂_y.
Operator conserved_charge(ChargeKind kind, int m, int n, const HybridSpace& space);

/// max-entry norm of [A, B].
double commutator_norm(const Operator& a, const Operator& b);

std::vector<double> linspace(double t0, double t1, std::size_t count);

}  // namespace iontrap
