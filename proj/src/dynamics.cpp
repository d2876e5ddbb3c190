#include "iontrap/dynamics.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace iontrap {

namespace {

constexpr cplx kI(0.0, 1.0);

class DisjointSets {
 public:
  explicit DisjointSets(Index n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }
  Index find(Index i) {
    while (parent_[static_cast<std::size_t>(i)] != i) {
      auto& p = parent_[static_cast<std::size_t>(i)];
      p = parent_[static_cast<std::size_t>(p)];
      i = p;
    }
    return i;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[static_cast<std::size_t>(a)] = b;
  }

 private:
  std::vector<Index> parent_;
};

void require_hermitian(const Operator& h) {
  if (h.rows() != h.cols()) throw DimensionError("Hamiltonian must be square");
  const double scale = std::max(1.0, max_abs(h));
  if (hermiticity_defect(h) > 1e-12 * scale) throw std::invalid_argument("Hamiltonian is not Hermitian");
}

/// exp(−iHh)·ψ via Hermitian eigendecomposition of a dense H.
Vector apply_step(const Matrix& h, double step, const Vector& psi) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Vector phases = (-kI * step * eig.eigenvalues().cast<cplx>()).array().exp();
  return eig.eigenvectors() * (phases.asDiagonal() * (eig.eigenvectors().adjoint() * psi));
}

Matrix step_unitary(const Matrix& h, double step) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Vector phases = (-kI * step * eig.eigenvalues().cast<cplx>()).array().exp();
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

void check_leakage(const StateVector& s, double gate, std::ptrdiff_t index) {
  const double leak = max_leakage(s);
  if (leak > gate) {
    std::ostringstream msg;
    msg << "leakage " << leak << " exceeds gate " << gate << " at sample " << index
        << "; increase the Fock truncation";
    throw LeakageError(msg.str(), index - 1);
  }
}

}  // namespace

void EvolutionConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(tolerance > 0.0 && tolerance <= 1e-2)) throw std::invalid_argument("tolerance must lie in (0, 1e-2]");
  if (!(leakage_gate > 0.0)) throw std::invalid_argument("leakage gate must be > 0");
}

StaticPropagator::StaticPropagator(const Operator& h, EvolutionMethod method, Index max_eigen_block)
    : dim_(h.rows()) {
  require_hermitian(h);
  DisjointSets sets(dim_);
  for (Index k = 0; k < h.outerSize(); ++k)
    for (Operator::InnerIterator it(h, k); it; ++it)
      if (it.value() != cplx(0.0)) sets.unite(it.row(), it.col());

  std::map<Index, std::size_t> root_to_block;
  for (Index i = 0; i < dim_; ++i) {
    const Index r = sets.find(i);
    auto [pos, inserted] = root_to_block.try_emplace(r, blocks_.size());
    if (inserted) blocks_.emplace_back();
    blocks_[pos->second].indices.push_back(i);
  }

  std::vector<Index> local(static_cast<std::size_t>(dim_));
  for (auto& block : blocks_) {
    const auto size = static_cast<Index>(block.indices.size());
    for (Index j = 0; j < size; ++j) local[static_cast<std::size_t>(block.indices[static_cast<std::size_t>(j)])] = j;
    Matrix dense = Matrix::Zero(size, size);
    for (Index j = 0; j < size; ++j) {
      const Index col = block.indices[static_cast<std::size_t>(j)];
      for (Operator::InnerIterator it(h, col); it; ++it)
        dense(local[static_cast<std::size_t>(it.row())], j) = it.value();
    }
    if (method == EvolutionMethod::scaled_exponential || size > max_eigen_block) {
      block.diagonalized = false;
      block.generator = std::move(dense);
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(dense);
      block.energies = eig.eigenvalues();
      block.vectors = eig.eigenvectors();
    }
  }
}

Index StaticPropagator::largest_block() const {
  Index m = 0;
  for (const auto& b : blocks_) m = std::max(m, static_cast<Index>(b.indices.size()));
  return m;
}

Vector StaticPropagator::apply(const Vector& psi, double t) const {
  if (psi.size() != dim_) throw DimensionError("state dimension does not match Hamiltonian");
  Vector out(dim_);
  for (const auto& block : blocks_) {
    const auto size = static_cast<Index>(block.indices.size());
    Vector local(size);
    for (Index j = 0; j < size; ++j) local(j) = psi(block.indices[static_cast<std::size_t>(j)]);
    Vector evolved;
    if (block.diagonalized) {
      const Vector phases = (-kI * t * block.energies.cast<cplx>()).array().exp();
      evolved = block.vectors * (phases.asDiagonal() * (block.vectors.adjoint() * local));
    } else {
      const Matrix generator = (-kI * t) * block.generator;
      const Matrix u = generator.exp();
      evolved = u * local;
    }
    for (Index j = 0; j < size; ++j) out(block.indices[static_cast<std::size_t>(j)]) = evolved(j);
  }
  return out;
}

StateVector evolve_static(const StateVector& state, const Operator& h, double t, EvolutionMethod method) {
  if (h.rows() != state.space.total_dim()) throw DimensionError("Hamiltonian does not act on the state space");
  if (method == EvolutionMethod::stepped)
    throw std::invalid_argument("stepped method applies to time-dependent handles");
  StaticPropagator prop(h, method);
  return {state.space, prop.apply(state.amplitudes, t)};
}

TimeDependentHamiltonian TimeDependentHamiltonian::constant(const HybridSpace& space, const Operator& h) {
  require_hermitian(h);
  Matrix dense(h);
  return {space, [dense](double) { return dense; }, std::nullopt};
}

SteppedPropagator::SteppedPropagator(TimeDependentHamiltonian handle, double dt)
    : handle_(std::move(handle)), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
}

Vector SteppedPropagator::step_segment(Vector psi, double t0, double t1) const {
  const double span = t1 - t0;
  if (span <= 1e-12 * std::max(1.0, std::abs(t1))) return psi;
  const auto steps = static_cast<long>(std::ceil(span / dt_ - 1e-9));
  const double h = span / static_cast<double>(std::max(steps, 1L));
  for (long k = 0; k < std::max(steps, 1L); ++k) {
    const double mid = t0 + (static_cast<double>(k) + 0.5) * h;
    psi = apply_step(handle_.at(mid), h, psi);
  }
  return psi;
}

const Matrix& SteppedPropagator::period_unitary() {
  if (!period_unitary_) {
    const double period = *handle_.period;
    const auto steps = static_cast<long>(std::ceil(period / dt_ - 1e-9));
    const double h = period / static_cast<double>(steps);
    const Index dim = handle_.space.total_dim();
    Matrix u = Matrix::Identity(dim, dim);
    for (long k = 0; k < steps; ++k) {
      const double mid = (static_cast<double>(k) + 0.5) * h;
      u = step_unitary(handle_.at(mid), h) * u;
    }
    // Nearest unitary (polar factor) removes the roundoff of the long product,
    // which otherwise compounds over many periods.
    Eigen::BDCSVD<Matrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
    period_unitary_ = svd.matrixU() * svd.matrixV().adjoint();
  }
  return *period_unitary_;
}

Vector SteppedPropagator::advance(const Vector& psi, double t0, double t1) {
  if (t1 < t0) throw std::invalid_argument("stepped propagation runs forward in time");
  // Sample times built as k·period carry rounding; spans within 1e-12 of a
  // period still use the cached period unitary.
  if (!handle_.period || t1 - t0 < *handle_.period * (1.0 - 1e-12)) return step_segment(psi, t0, t1);
  const double period = *handle_.period;
  const double boundary = std::ceil(t0 / period - 1e-12) * period;
  Vector out = step_segment(psi, t0, boundary);
  const auto full = static_cast<long>(std::floor((t1 - boundary) / period + 1e-12));
  const Matrix& u = period_unitary();
  for (long k = 0; k < full; ++k) out = u * out;
  const double resume = boundary + static_cast<double>(full) * period;
  // H(resume + s) = H(s): step the remainder with the periodic clock.
  return step_segment(out, resume - std::floor(resume / period + 1e-12) * period,
                      t1 - std::floor(resume / period + 1e-12) * period);
}

double max_leakage(const StateVector& state) {
  double worst = 0.0;
  for (const auto& m : state.space.modes()) worst = std::max(worst, leakage(state, m.label));
  return worst;
}

StateVector evolve_timedep(const StateVector& state, const TimeDependentHamiltonian& handle, double t_final,
                           const EvolutionConfig& cfg) {
  cfg.validate();
  if (cfg.method != EvolutionMethod::stepped)
    throw std::invalid_argument("evolve_timedep requires the stepped method");
  if (handle.space.total_dim() != state.space.total_dim())
    throw DimensionError("handle does not act on the state space");
  double dt = cfg.dt;
  Vector coarse = SteppedPropagator(handle, dt).advance(state.amplitudes, 0.0, t_final);
  Vector fine = SteppedPropagator(handle, dt / 2).advance(state.amplitudes, 0.0, t_final);
  while ((coarse - fine).norm() / 3.0 > cfg.tolerance) {
    dt /= 2;
    if (dt / 2 < cfg.min_dt) {
      std::ostringstream msg;
      msg << "stepped evolution did not converge to " << cfg.tolerance << " above min_dt " << cfg.min_dt;
      throw ConvergenceError(msg.str());
    }
    coarse = std::move(fine);
    fine = SteppedPropagator(handle, dt / 2).advance(state.amplitudes, 0.0, t_final);
  }
  StateVector out{state.space, fine};
  check_leakage(out, cfg.leakage_gate, 0);
  return out;
}

Observable expectation(std::string name, Operator op) {
  return {std::move(name), [op = std::move(op)](const StateVector& s) {
            return s.amplitudes.dot(op * s.amplitudes);
          }};
}

std::vector<double> Trajectory::real_series(const std::string& name) const {
  auto it = observables.find(name);
  if (it == observables.end()) throw std::out_of_range("no observable named " + name);
  std::vector<double> out;
  out.reserve(it->second.size());
  for (const auto& v : it->second) out.push_back(v.real());
  return out;
}

namespace {

void require_ascending(std::span<const double> times) {
  for (std::size_t k = 1; k < times.size(); ++k)
    if (times[k] < times[k - 1]) throw std::invalid_argument("sample times must be ascending");
}

void record(Trajectory& traj, double t, StateVector s, const std::vector<Observable>& observables,
            double gate) {
  check_leakage(s, gate, static_cast<std::ptrdiff_t>(traj.times.size()));
  for (const auto& o : observables) traj.observables[o.name].push_back(o.fn(s));
  traj.times.push_back(t);
  traj.states.push_back(std::move(s));
}

}  // namespace

Trajectory trajectory(const StateVector& state, const Operator& h, std::span<const double> times,
                      const std::vector<Observable>& observables, const EvolutionConfig& cfg) {
  require_ascending(times);
  Trajectory traj;
  for (const auto& o : observables) traj.observables[o.name];
  if (times.empty()) return traj;
  if (h.rows() != state.space.total_dim()) throw DimensionError("Hamiltonian does not act on the state space");
  const auto method = cfg.method == EvolutionMethod::stepped ? EvolutionMethod::eigendecomposition : cfg.method;
  StaticPropagator prop(h, method);
  for (double t : times) record(traj, t, {state.space, prop.apply(state.amplitudes, t)}, observables, cfg.leakage_gate);
  return traj;
}

Trajectory trajectory(const StateVector& state, const TimeDependentHamiltonian& handle,
                      std::span<const double> times, const std::vector<Observable>& observables,
                      const EvolutionConfig& cfg) {
  cfg.validate();
  require_ascending(times);
  Trajectory traj;
  for (const auto& o : observables) traj.observables[o.name];
  if (times.empty()) return traj;
  if (handle.space.total_dim() != state.space.total_dim())
    throw DimensionError("handle does not act on the state space");

  auto sweep = [&](double dt) {
    SteppedPropagator prop(handle, dt);
    std::vector<Vector> out;
    Vector psi = state.amplitudes;
    double t = 0.0;
    for (double sample : times) {
      psi = prop.advance(psi, t, sample);
      t = sample;
      out.push_back(psi);
    }
    return out;
  };

  double dt = cfg.dt;
  auto coarse = sweep(dt);
  auto fine = sweep(dt / 2);
  double err = (coarse.back() - fine.back()).norm() / 3.0;
  while (err > cfg.tolerance) {
    dt /= 2;
    if (dt / 2 < cfg.min_dt) {
      std::ostringstream msg;
      msg << "stepped trajectory did not converge to " << cfg.tolerance << " (estimate " << err << ")";
      throw ConvergenceError(msg.str());
    }
    coarse = std::move(fine);
    fine = sweep(dt / 2);
    err = (coarse.back() - fine.back()).norm() / 3.0;
  }
  for (std::size_t k = 0; k < times.size(); ++k)
    record(traj, times[k], {state.space, fine[k]}, observables, cfg.leakage_gate);
  traj.diagnostics = {dt / 2, err};
  return traj;
}

Operator conserved_charge(ChargeKind kind, int m, int n, const HybridSpace& space) {
  if (!space.has_mode('x')) throw DimensionError("conserved charges need mode x");
  const Operator nx = number_operator(space, 'x');
  switch (kind) {
    case ChargeKind::K:
      if (!space.has_mode('y')) throw DimensionError("charge K needs mode y");
      return static_cast<double>(n) * nx + static_cast<double>(m) * number_operator(space, 'y');
    case ChargeKind::L:
      if (!space.internal() || !space.internal()->contains(Level::b))
        throw DimensionError("charge L needs internal level b");
      return nx + static_cast<double>(m) * projector(space, Level::b);
    case ChargeKind::pairdiff:
      if (!space.has_mode('y')) throw DimensionError("pairdiff needs mode y");
      return nx - number_operator(space, 'y');
  }
  throw std::invalid_argument("unknown charge kind");
}

double commutator_norm(const Operator& a, const Operator& b) {
  Operator c = a * b - b * a;
  return max_abs(c);
}

std::vector<double> linspace(double t0, double t1, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) out[0] = t0;
  for (std::size_t k = 0; k < count && count > 1; ++k)
    out[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(count - 1);
  return out;
}

}  // namespace iontrap
