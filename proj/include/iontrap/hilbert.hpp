#pragma once

// Truncated Fock lattices, composite spaces and elementary operators.
//
// Index convention, used everywhere in the library: factors are ordered
// x ⊗ y ⊗ internal, the first factor is the most significant. For a space
// with modes of dims (Dx, Dy) and L internal levels
//
//     index(nx, ny, level) = (nx * Dy + ny) * L + level_position
//
// which is exactly the layout produced by Eigen::kroneckerProduct(X, Y, I).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iontrap {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
/// Sparse operator on a declared space (Hamiltonians, embedded ladder ops).
using Operator = Eigen::SparseMatrix<cplx>;

constexpr double default_truncation_tolerance = 1e-8;

/// Raised when a Fock truncation cannot represent a requested object.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, Index required_dim)
      : std::runtime_error(what), required_dim_(required_dim) {}
  Index required_dim() const { return required_dim_; }

 private:
  Index required_dim_;
};

/// Raised on incompatible spaces / shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Level { a, b, c, d };

char level_name(Level level);
Level parse_level(char name);

struct ModeSpace {
  Index dim = 1;
  char label = 'x';

  bool operator==(const ModeSpace&) const = default;
};

/// Ordered internal levels. Level d is bookkeeping only and never evolves.
struct InternalSpace {
  std::vector<Level> levels;

  Index dim() const { return static_cast<Index>(levels.size()); }
  bool contains(Level level) const;
  Index position(Level level) const;

  bool operator==(const InternalSpace&) const = default;

  static InternalSpace two_level() { return {{Level::a, Level::b}}; }
  static InternalSpace lambda() { return {{Level::a, Level::b, Level::c}}; }
};

/// Tensor product x ⊗ y ⊗ internal of any subset of factors.
class HybridSpace {
 public:
  HybridSpace() = default;
  HybridSpace(std::vector<ModeSpace> modes, std::optional<InternalSpace> internal = std::nullopt);

  static HybridSpace single(ModeSpace mode) { return HybridSpace({mode}); }
  static HybridSpace two_mode(Index dim_x, Index dim_y) {
    return HybridSpace({{dim_x, 'x'}, {dim_y, 'y'}});
  }
  static HybridSpace internal_only(InternalSpace internal) {
    return HybridSpace({}, std::move(internal));
  }

  const std::vector<ModeSpace>& modes() const { return modes_; }
  const std::optional<InternalSpace>& internal() const { return internal_; }
  bool has_internal() const { return internal_.has_value(); }
  bool has_mode(char label) const;
  Index mode_position(char label) const;
  const ModeSpace& mode(char label) const { return modes_[static_cast<std::size_t>(mode_position(label))]; }

  Index total_dim() const { return total_dim_; }
  Index internal_dim() const { return internal_ ? internal_->dim() : 1; }
  /// Factor dimensions in storage order (modes, then internal if present).
  std::vector<Index> factor_dims() const;

  /// Linear index from Fock numbers (one per mode, in mode order) and level.
  Index index(std::span<const Index> fock, std::optional<Level> level = std::nullopt) const;
  Index index(Index nx, Index ny, Level level) const;
  Index index(Index nx, Index ny) const;
  /// Fock number of mode `label` at linear index `i`.
  Index fock_number(Index i, char label) const;
  /// Internal-level position at linear index `i`.
  Index level_position(Index i) const { return i % internal_dim(); }

  bool operator==(const HybridSpace& other) const {
    return modes_ == other.modes_ && internal_ == other.internal_;
  }

 private:
  std::vector<ModeSpace> modes_;
  std::optional<InternalSpace> internal_;
  Index total_dim_ = 1;
};

struct StateVector {
  HybridSpace space;
  Vector amplitudes;

  double norm() const { return amplitudes.norm(); }
  StateVector normalized() const;
};

struct DensityOperator {
  HybridSpace space;
  Matrix matrix;
};

// ---------------------------------------------------------------------------
// Elementary single-mode matrices, templated on the scalar type.

/// â with â|n⟩ = √n |n−1⟩; â†|dim−1⟩ is dropped by the matrix shape.
template <typename Scalar = cplx>
Eigen::SparseMatrix<Scalar> annihilation_matrix(Index dim) {
  Eigen::SparseMatrix<Scalar> a(dim, dim);
  a.reserve(Eigen::VectorXi::Constant(dim, 1));
  for (Index n = 1; n < dim; ++n) a.insert(n - 1, n) = Scalar(std::sqrt(static_cast<double>(n)));
  a.makeCompressed();
  return a;
}

template <typename Scalar = cplx>
Eigen::SparseMatrix<Scalar> number_matrix(Index dim) {
  Eigen::SparseMatrix<Scalar> n(dim, dim);
  n.reserve(Eigen::VectorXi::Constant(dim, 1));
  for (Index k = 0; k < dim; ++k) n.insert(k, k) = Scalar(static_cast<double>(k));
  n.makeCompressed();
  return n;
}

template <typename Scalar = cplx>
Eigen::SparseMatrix<Scalar> identity_matrix(Index dim) {
  Eigen::SparseMatrix<Scalar> id(dim, dim);
  id.setIdentity();
  return id;
}

struct LadderPair {
  Operator annihilator;
  Operator creator;
};

LadderPair ladder_ops(const ModeSpace& space);

// ---------------------------------------------------------------------------
// States.

StateVector fock_state(const ModeSpace& space, Index n);
StateVector level_state(const InternalSpace& space, Level level);

/// Probability mass at n >= dim of the Poisson law with the given mean.
double poisson_tail(double mean, Index dim);

/// Coherent state |α⟩ truncated to `space`, renormalized; ⟨0|α⟩ is real
/// positive. Throws TruncationError if the exact Poisson tail above dim−1
/// exceeds `tolerance`; the message names the smallest sufficient dim.
StateVector coherent_state(const ModeSpace& space, cplx alpha,
                           double tolerance = default_truncation_tolerance);

/// Kronecker product of the states in factor order; spaces are merged.
StateVector compose(std::span<const StateVector> states);
StateVector compose(std::initializer_list<StateVector> states);

/// Probability in the top two Fock levels of mode `label`.
double leakage(const StateVector& state, char label);

// ---------------------------------------------------------------------------
// Operators.

/// exp(ζâ† − ζ*â) from exact exponentiation of the truncated generator.
/// Throws TruncationError when D(ζ)|0⟩ does not fit in `space` to `tolerance`.
Matrix displacement_operator(const ModeSpace& space, cplx zeta,
                             double tolerance = default_truncation_tolerance);

/// Lift a single-mode operator acting on mode `label` to the full space.
Operator embed_mode(const HybridSpace& space, char label, const Operator& op);
/// Lift an internal-space operator to the full space.
Operator embed_internal(const HybridSpace& space, const Operator& op);
/// |to⟩⟨from| on the full space.
Operator transition(const HybridSpace& space, Level to, Level from);
Operator projector(const HybridSpace& space, Level level);
Operator number_operator(const HybridSpace& space, char label);

/// max |H − H†| entry.
double hermiticity_defect(const Operator& h);
double hermiticity_defect(const Matrix& h);
/// max |entry| of a sparse matrix.
double max_abs(const Operator& op);

}  // namespace iontrap
