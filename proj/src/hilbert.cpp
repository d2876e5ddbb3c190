#include "iontrap/hilbert.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace iontrap {

char level_name(Level level) {
  switch (level) {
    case Level::a: return 'a';
    case Level::b: return 'b';
    case Level::c: return 'c';
    case Level::d: return 'd';
  }
  return '?';
}

Level parse_level(char name) {
  switch (name) {
    case 'a': return Level::a;
    case 'b': return Level::b;
    case 'c': return Level::c;
    case 'd': return Level::d;
    default: throw std::invalid_argument(std::string("unknown internal level '") + name + "'");
  }
}

bool InternalSpace::contains(Level level) const {
  return std::find(levels.begin(), levels.end(), level) != levels.end();
}

Index InternalSpace::position(Level level) const {
  auto it = std::find(levels.begin(), levels.end(), level);
  if (it == levels.end())
    throw DimensionError(std::string("internal space has no level '") + level_name(level) + "'");
  return static_cast<Index>(it - levels.begin());
}

HybridSpace::HybridSpace(std::vector<ModeSpace> modes, std::optional<InternalSpace> internal)
    : modes_(std::move(modes)), internal_(std::move(internal)) {
  std::set<char> labels;
  for (const auto& m : modes_) {
    if (m.dim < 1) throw DimensionError("mode dimension must be >= 1");
    if (!labels.insert(m.label).second)
      throw DimensionError(std::string("duplicate mode label '") + m.label + "'");
  }
  if (internal_) {
    const auto& lv = internal_->levels;
    if (lv.empty()) throw DimensionError("internal space needs at least one level");
    if (std::set<Level>(lv.begin(), lv.end()).size() != lv.size())
      throw DimensionError("duplicate internal level");
  }
  total_dim_ = internal_dim();
  for (const auto& m : modes_) total_dim_ *= m.dim;
}

bool HybridSpace::has_mode(char label) const {
  return std::any_of(modes_.begin(), modes_.end(), [&](const ModeSpace& m) { return m.label == label; });
}

Index HybridSpace::mode_position(char label) const {
  for (std::size_t k = 0; k < modes_.size(); ++k)
    if (modes_[k].label == label) return static_cast<Index>(k);
  throw DimensionError(std::string("space has no mode '") + label + "'");
}

std::vector<Index> HybridSpace::factor_dims() const {
  std::vector<Index> dims;
  for (const auto& m : modes_) dims.push_back(m.dim);
  if (internal_) dims.push_back(internal_->dim());
  return dims;
}

Index HybridSpace::index(std::span<const Index> fock, std::optional<Level> level) const {
  if (fock.size() != modes_.size()) throw DimensionError("one Fock number per mode required");
  Index idx = 0;
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    if (fock[k] < 0 || fock[k] >= modes_[k].dim)
      throw std::out_of_range("Fock number outside truncation of mode '" +
                              std::string(1, modes_[k].label) + "'");
    idx = idx * modes_[k].dim + fock[k];
  }
  if (internal_) {
    if (!level) throw DimensionError("space has an internal factor; level required");
    idx = idx * internal_->dim() + internal_->position(*level);
  } else if (level) {
    throw DimensionError("space has no internal factor");
  }
  return idx;
}

Index HybridSpace::index(Index nx, Index ny, Level level) const {
  const Index f[2] = {nx, ny};
  return index(std::span<const Index>(f, 2), level);
}

Index HybridSpace::index(Index nx, Index ny) const {
  const Index f[2] = {nx, ny};
  return index(std::span<const Index>(f, 2), std::nullopt);
}

Index HybridSpace::fock_number(Index i, char label) const {
  const auto pos = static_cast<std::size_t>(mode_position(label));
  Index stride = internal_dim();
  for (std::size_t k = modes_.size(); k-- > pos + 1;) stride *= modes_[k].dim;
  return (i / stride) % modes_[pos].dim;
}

StateVector StateVector::normalized() const {
  const double nrm = norm();
  if (nrm == 0.0) throw std::domain_error("cannot normalize the zero vector");
  return {space, amplitudes / nrm};
}

LadderPair ladder_ops(const ModeSpace& space) {
  Operator a = annihilation_matrix(space.dim);
  Operator ad = a.adjoint();
  return {a, ad};
}

StateVector fock_state(const ModeSpace& space, Index n) {
  if (n < 0 || n >= space.dim) {
    std::ostringstream msg;
    msg << "Fock state |" << n << "> outside truncation dim " << space.dim;
    throw std::out_of_range(msg.str());
  }
  Vector amp = Vector::Zero(space.dim);
  amp(n) = 1.0;
  return {HybridSpace::single(space), amp};
}

StateVector level_state(const InternalSpace& space, Level level) {
  Vector amp = Vector::Zero(space.dim());
  amp(space.position(level)) = 1.0;
  return {HybridSpace::internal_only(space), amp};
}

double poisson_tail(double mean, Index dim) {
  if (mean <= 0.0) return dim > 0 ? 0.0 : 1.0;
  if (dim <= 0) return 1.0;
  // Sum the tail directly so that tiny tails keep full relative precision.
  double sum = 0.0;
  const double upper = mean + 40.0 * std::sqrt(mean) + 60.0;
  for (Index n = dim; static_cast<double>(n) <= std::max(upper, static_cast<double>(dim) + 60.0); ++n) {
    const double dn = static_cast<double>(n);
    const double term = std::exp(dn * std::log(mean) - mean - std::lgamma(dn + 1.0));
    sum += term;
    if (dn > mean && term < 1e-300) break;
  }
  return std::min(sum, 1.0);
}

namespace {

Index required_dim(double mean, double tolerance) {
  Index d = 1;
  while (poisson_tail(mean, d) > tolerance) ++d;
  return d;
}

}  // namespace

StateVector coherent_state(const ModeSpace& space, cplx alpha, double tolerance) {
  const double mean = std::norm(alpha);
  const double tail = poisson_tail(mean, space.dim);
  if (tail > tolerance) {
    const Index need = required_dim(mean, tolerance);
    std::ostringstream msg;
    msg << "coherent state |alpha|=" << std::abs(alpha) << " leaks " << tail
        << " above Fock level " << space.dim - 1 << " of mode '" << space.label
        << "'; requires dim >= " << need;
    throw TruncationError(msg.str(), need);
  }
  Vector amp(space.dim);
  amp(0) = std::exp(-0.5 * mean);
  for (Index n = 1; n < space.dim; ++n)
    amp(n) = amp(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  amp /= amp.norm();
  return {HybridSpace::single(space), amp};
}

StateVector compose(std::span<const StateVector> states) {
  if (states.empty()) throw DimensionError("compose needs at least one state");
  std::vector<ModeSpace> modes;
  std::optional<InternalSpace> internal;
  Vector amp = Vector::Ones(1);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& s = states[k];
    if (s.amplitudes.size() != s.space.total_dim())
      throw DimensionError("state amplitude length does not match its space");
    if (internal)
      throw DimensionError("internal factor must be the last factor (order x, y, internal)");
    for (const auto& m : s.space.modes()) modes.push_back(m);
    if (s.space.internal()) internal = s.space.internal();
    Vector next = Eigen::kroneckerProduct(amp, s.amplitudes);
    amp = std::move(next);
  }
  HybridSpace space(std::move(modes), std::move(internal));
  return {space, amp};
}

StateVector compose(std::initializer_list<StateVector> states) {
  std::vector<StateVector> v(states);
  return compose(std::span<const StateVector>(v));
}

double leakage(const StateVector& state, char label) {
  const Index dim = state.space.mode(label).dim;
  double p = 0.0;
  for (Index i = 0; i < state.amplitudes.size(); ++i)
    if (state.space.fock_number(i, label) >= dim - 2) p += std::norm(state.amplitudes(i));
  return p;
}

Matrix displacement_operator(const ModeSpace& space, cplx zeta, double tolerance) {
  const double tail = poisson_tail(std::norm(zeta), space.dim);
  if (tail > tolerance) {
    const Index need = required_dim(std::norm(zeta), tolerance);
    std::ostringstream msg;
    msg << "displacement |zeta|=" << std::abs(zeta) << " not representable in dim "
        << space.dim << " (tail " << tail << "); requires dim >= " << need;
    throw TruncationError(msg.str(), need);
  }
  const Matrix a = Matrix(annihilation_matrix(space.dim));
  // exp(ζâ† − ζ*â) = exp(−iK), K = i(ζâ† − ζ*â) Hermitian.
  const cplx I(0.0, 1.0);
  const Matrix k = I * (zeta * a.adjoint() - std::conj(zeta) * a);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
  const Vector phases = (-I * eig.eigenvalues().cast<cplx>()).array().exp();
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

namespace {

Operator kron_all(const std::vector<Operator>& factors) {
  Operator out = identity_matrix(1);
  for (const auto& f : factors) {
    Operator next = Eigen::kroneckerProduct(out, f);
    out = std::move(next);
  }
  out.prune(cplx(0.0));
  out.makeCompressed();
  return out;
}

}  // namespace

Operator embed_mode(const HybridSpace& space, char label, const Operator& op) {
  const Index pos = space.mode_position(label);
  if (op.rows() != space.modes()[static_cast<std::size_t>(pos)].dim || op.cols() != op.rows())
    throw DimensionError(std::string("operator shape does not match mode '") + label + "'");
  std::vector<Operator> factors;
  for (std::size_t k = 0; k < space.modes().size(); ++k)
    factors.push_back(static_cast<Index>(k) == pos ? op : identity_matrix(space.modes()[k].dim));
  if (space.internal()) factors.push_back(identity_matrix(space.internal()->dim()));
  return kron_all(factors);
}

Operator embed_internal(const HybridSpace& space, const Operator& op) {
  if (!space.internal()) throw DimensionError("space has no internal factor");
  if (op.rows() != space.internal()->dim() || op.cols() != op.rows())
    throw DimensionError("operator shape does not match internal space");
  std::vector<Operator> factors;
  for (const auto& m : space.modes()) factors.push_back(identity_matrix(m.dim));
  factors.push_back(op);
  return kron_all(factors);
}

Operator transition(const HybridSpace& space, Level to, Level from) {
  if (!space.internal()) throw DimensionError("space has no internal factor");
  const auto& in = *space.internal();
  Operator op(in.dim(), in.dim());
  op.insert(in.position(to), in.position(from)) = 1.0;
  return embed_internal(space, op);
}

Operator projector(const HybridSpace& space, Level level) { return transition(space, level, level); }

Operator number_operator(const HybridSpace& space, char label) {
  return embed_mode(space, label, number_matrix(space.mode(label).dim));
}

double max_abs(const Operator& op) {
  double m = 0.0;
  for (Index k = 0; k < op.outerSize(); ++k)
    for (Operator::InnerIterator it(op, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double hermiticity_defect(const Operator& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  Operator diff = h - Operator(h.adjoint());
  return max_abs(diff);
}

double hermiticity_defect(const Matrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  if (h.size() == 0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace iontrap
