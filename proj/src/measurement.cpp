#include "iontrap/measurement.hpp"

#include <algorithm>
#include <cmath>

namespace iontrap {

namespace {

struct FactorSplit {
  HybridSpace kept_space;
  std::vector<Index> kept_index;    // per full index
  std::vector<Index> traced_index;  // per full index
  Index kept_dim = 1;
  Index traced_dim = 1;
};

FactorSplit split_factors(const HybridSpace& space, std::span<const Subsystem> keep) {
  const auto& modes = space.modes();
  const std::size_t nf = modes.size() + (space.internal() ? 1 : 0);
  std::vector<bool> kept(nf, false);
  for (const auto& s : keep) {
    if (s.internal) {
      if (!space.internal()) throw DimensionError("space has no internal factor");
      kept[nf - 1] = true;
    } else {
      kept[static_cast<std::size_t>(space.mode_position(s.label))] = true;
    }
  }
  const auto dims = space.factor_dims();
  std::vector<ModeSpace> kept_modes;
  std::optional<InternalSpace> kept_internal;
  FactorSplit out;
  for (std::size_t f = 0; f < nf; ++f) {
    if (kept[f]) {
      out.kept_dim *= dims[f];
      if (f < modes.size()) kept_modes.push_back(modes[f]);
      else kept_internal = space.internal();
    } else {
      out.traced_dim *= dims[f];
    }
  }
  out.kept_space = HybridSpace(std::move(kept_modes), std::move(kept_internal));

  const Index total = space.total_dim();
  out.kept_index.resize(static_cast<std::size_t>(total));
  out.traced_index.resize(static_cast<std::size_t>(total));
  std::vector<Index> digits(nf);
  for (Index i = 0; i < total; ++i) {
    Index rem = i;
    for (std::size_t f = nf; f-- > 0;) {
      digits[f] = rem % dims[f];
      rem /= dims[f];
    }
    Index ki = 0, ti = 0;
    for (std::size_t f = 0; f < nf; ++f) {
      if (kept[f]) ki = ki * dims[f] + digits[f];
      else ti = ti * dims[f] + digits[f];
    }
    out.kept_index[static_cast<std::size_t>(i)] = ki;
    out.traced_index[static_cast<std::size_t>(i)] = ti;
  }
  return out;
}

void require_single_mode(const DensityOperator& rho) {
  if (rho.space.modes().size() != 1 || rho.space.internal())
    throw DimensionError("single-mode density operator required");
}

}  // namespace

DensityOperator pure_density(const StateVector& state) {
  return {state.space, state.amplitudes * state.amplitudes.adjoint()};
}

DensityOperator reduce(const StateVector& state, std::span<const Subsystem> keep) {
  const auto split = split_factors(state.space, keep);
  Matrix m = Matrix::Zero(split.kept_dim, split.traced_dim);
  for (Index i = 0; i < state.amplitudes.size(); ++i)
    m(split.kept_index[static_cast<std::size_t>(i)], split.traced_index[static_cast<std::size_t>(i)]) =
        state.amplitudes(i);
  Matrix rho = m * m.adjoint();
  return {split.kept_space, (rho + rho.adjoint()) / 2.0};
}

DensityOperator reduce(const DensityOperator& rho, std::span<const Subsystem> keep) {
  const auto split = split_factors(rho.space, keep);
  Matrix out = Matrix::Zero(split.kept_dim, split.kept_dim);
  const Index total = rho.space.total_dim();
  for (Index j = 0; j < total; ++j)
    for (Index i = 0; i < total; ++i)
      if (split.traced_index[static_cast<std::size_t>(i)] == split.traced_index[static_cast<std::size_t>(j)])
        out(split.kept_index[static_cast<std::size_t>(i)], split.kept_index[static_cast<std::size_t>(j)]) +=
            rho.matrix(i, j);
  return {split.kept_space, out};
}

DensityOperator reduce(const StateVector& state, Subsystem keep) {
  return reduce(state, std::span<const Subsystem>(&keep, 1));
}

DensityOperator reduce(const DensityOperator& rho, Subsystem keep) {
  return reduce(rho, std::span<const Subsystem>(&keep, 1));
}

MeasurementRecord project_internal(const StateVector& state, Level level, double min_probability) {
  const auto& internal = state.space.internal();
  if (!internal) throw DimensionError("state has no internal factor");
  const Index pos = internal->position(level);
  const Index nl = internal->dim();
  Vector vib(state.space.total_dim() / nl);
  for (Index k = 0; k < vib.size(); ++k) vib(k) = state.amplitudes(k * nl + pos);
  const double p = vib.squaredNorm();
  if (p <= min_probability)
    throw std::domain_error(std::string("outcome '") + level_name(level) +
                            "' has zero probability; post-measurement state undefined");
  return {level, p, {HybridSpace(state.space.modes()), vib / std::sqrt(p)}};
}

double atomic_inversion(const StateVector& state) {
  const auto& internal = state.space.internal();
  if (!internal || !internal->contains(Level::a) || !internal->contains(Level::b))
    throw DimensionError("atomic inversion needs internal levels a and b");
  const Index nl = internal->dim();
  const Index pa = internal->position(Level::a), pb = internal->position(Level::b);
  double inv = 0.0;
  for (Index k = 0; k < state.space.total_dim() / nl; ++k)
    inv += std::norm(state.amplitudes(k * nl + pa)) - std::norm(state.amplitudes(k * nl + pb));
  return inv;
}

double atomic_inversion(const DensityOperator& rho) {
  const auto& internal = rho.space.internal();
  if (!internal || !rho.space.modes().empty())
    throw DimensionError("internal-only density operator required");
  return rho.matrix(internal->position(Level::a), internal->position(Level::a)).real() -
         rho.matrix(internal->position(Level::b), internal->position(Level::b)).real();
}

RealVector number_distribution(const DensityOperator& rho) {
  require_single_mode(rho);
  return rho.matrix.diagonal().real();
}

double mean_number(const DensityOperator& rho) {
  const RealVector p = number_distribution(rho);
  double s = 0.0;
  for (Index k = 0; k < p.size(); ++k) s += static_cast<double>(k) * p(k);
  return s;
}

namespace {

struct Moments {
  cplx a;
  cplx a2;
  double ada = 0.0;
};

Moments ladder_moments(const DensityOperator& rho) {
  require_single_mode(rho);
  const Matrix& r = rho.matrix;
  Moments mom;
  for (Index k = 1; k < r.rows(); ++k) {
    // ⟨â⟩ = Σ √k ρ_{k,k−1}
    mom.a += std::sqrt(static_cast<double>(k)) * r(k, k - 1);
    mom.ada += static_cast<double>(k) * r(k, k).real();
  }
  for (Index k = 2; k < r.rows(); ++k)
    mom.a2 += std::sqrt(static_cast<double>(k) * static_cast<double>(k - 1)) * r(k, k - 2);
  return mom;
}

}  // namespace

double quadrature_variance(const DensityOperator& rho, double theta) {
  // ⟨X²⟩ − ⟨X⟩² = ½ + ⟨Δâ†Δâ⟩ + Re(e^{−2iθ}(⟨â²⟩ − ⟨â⟩²)), using ââ† = â†â + 1.
  const auto mom = ladder_moments(rho);
  const cplx var_a = mom.a2 - mom.a * mom.a;
  const double n_fluct = mom.ada - std::norm(mom.a);
  return 0.5 + n_fluct + std::real(std::exp(cplx(0.0, -2.0 * theta)) * var_a);
}

Squeezing optimal_quadrature_variance(const DensityOperator& rho) {
  const auto mom = ladder_moments(rho);
  const cplx var_a = mom.a2 - mom.a * mom.a;
  const double n_fluct = mom.ada - std::norm(mom.a);
  return {0.5 + n_fluct - std::abs(var_a), 0.5 * (std::arg(var_a) - M_PI)};
}

double purity(const DensityOperator& rho) {
  return (rho.matrix * rho.matrix).trace().real();
}

double fidelity(const StateVector& state, const StateVector& target) {
  if (state.amplitudes.size() != target.amplitudes.size()) throw DimensionError("fidelity: dimension mismatch");
  return std::norm(target.amplitudes.dot(state.amplitudes));
}

double fidelity(const DensityOperator& rho, const StateVector& target) {
  if (rho.matrix.rows() != target.amplitudes.size()) throw DimensionError("fidelity: dimension mismatch");
  return target.amplitudes.dot(rho.matrix * target.amplitudes).real();
}

namespace {

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig((m + m.adjoint()) / 2.0);
  const RealVector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.matrix.rows() != sigma.matrix.rows()) throw DimensionError("fidelity: dimension mismatch");
  const Matrix s = psd_sqrt(rho.matrix);
  const Matrix inner = s * sigma.matrix * s;
  Eigen::SelfAdjointEigenSolver<Matrix> eig((inner + inner.adjoint()) / 2.0);
  const double tr = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::min(1.0, tr * tr);
}

std::size_t count_local_maxima(const RealVector& p, std::size_t stride, double floor) {
  if (stride == 0) throw std::invalid_argument("stride must be >= 1");
  std::size_t count = 0;
  const auto size = static_cast<std::size_t>(p.size());
  // Only the sublattice carrying the largest weight is scanned.
  std::size_t best_start = 0;
  double best_weight = -1.0;
  for (std::size_t start = 0; start < std::min(stride, size); ++start) {
    double w = 0.0;
    for (std::size_t k = start; k < size; k += stride) w += p(static_cast<Index>(k));
    if (w > best_weight) {
      best_weight = w;
      best_start = start;
    }
  }
  std::vector<double> lattice;
  for (std::size_t k = best_start; k < size; k += stride) lattice.push_back(p(static_cast<Index>(k)));
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const bool left = k == 0 || lattice[k] > lattice[k - 1];
    const bool right = k + 1 == lattice.size() || lattice[k] > lattice[k + 1];
    if (lattice[k] > floor && left && right) ++count;
  }
  return count;
}

double parity_expectation(const DensityOperator& rho) {
  require_single_mode(rho);
  double s = 0.0;
  for (Index k = 0; k < rho.matrix.rows(); ++k) s += (k % 2 == 0 ? 1.0 : -1.0) * rho.matrix(k, k).real();
  return s;
}

}  // namespace iontrap
