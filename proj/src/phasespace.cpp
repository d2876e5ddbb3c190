#include "iontrap/phasespace.hpp"

#include "iontrap/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace iontrap {

void GridSpec::validate() const {
  if (re_points < 2 || im_points < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
  if (!(re_max > re_min) || !(im_max > im_min)) throw std::invalid_argument("grid bounds must be increasing");
  if (!std::isfinite(re_min) || !std::isfinite(re_max) || !std::isfinite(im_min) || !std::isfinite(im_max))
    throw std::invalid_argument("grid bounds must be finite");
}

double WignerGrid::cell_area() const {
  const double dre = (re_axis(re_axis.size() - 1) - re_axis(0)) / static_cast<double>(re_axis.size() - 1);
  const double dim = (im_axis(im_axis.size() - 1) - im_axis(0)) / static_cast<double>(im_axis.size() - 1);
  return dre * dim;
}

double WignerGrid::riemann_sum() const { return values.sum() * cell_area(); }

std::optional<double> WignerGrid::value_at_origin() const {
  for (Index i = 0; i < im_axis.size(); ++i)
    for (Index j = 0; j < re_axis.size(); ++j)
      if (std::abs(im_axis(i)) < 1e-12 && std::abs(re_axis(j)) < 1e-12) return values(i, j);
  return std::nullopt;
}

GridSpec default_grid(const DensityOperator& rho) {
  const double half = std::max(3.0, 2.0 * std::sqrt(std::max(mean_number(rho), 0.0)) + 3.0);
  return GridSpec::square(half, 101);
}

Matrix displacement_elements(Index dim, cplx beta) {
  // For j <= k: ⟨j|D(β)|k⟩ = √(j!/k!) (−β*)^{k−j} e^{−|β|²/2} L_j^{(k−j)}(|β|²),
  // and ⟨k|D(β)|j⟩ = √(j!/k!) β^{k−j} e^{−|β|²/2} L_j^{(k−j)}(|β|²).
  // Laguerre values come from the upward recurrence in degree; the prefactor
  // is formed in log space so large |β| neither overflows nor underflows early.
  Matrix m = Matrix::Zero(dim, dim);
  const double x = std::norm(beta);
  const double log_abs = x > 0.0 ? 0.5 * std::log(x) : 0.0;
  const double phase_upper = std::arg(-std::conj(beta));
  const double phase_lower = std::arg(beta);
  std::vector<double> lag(static_cast<std::size_t>(dim)), log_fact(static_cast<std::size_t>(dim));
  for (Index k = 0; k < dim; ++k) log_fact[static_cast<std::size_t>(k)] = std::lgamma(static_cast<double>(k) + 1.0);
  for (Index d = 0; d < dim; ++d) {
    if (x == 0.0 && d > 0) break;
    const Index count = dim - d;
    lag[0] = 1.0;
    if (count > 1) lag[1] = 1.0 + static_cast<double>(d) - x;
    for (Index j = 1; j + 1 < count; ++j) {
      const auto jj = static_cast<double>(j);
      lag[static_cast<std::size_t>(j + 1)] =
          ((2.0 * jj + 1.0 + static_cast<double>(d) - x) * lag[static_cast<std::size_t>(j)] -
           (jj + static_cast<double>(d)) * lag[static_cast<std::size_t>(j - 1)]) /
          (jj + 1.0);
    }
    for (Index j = 0; j < count; ++j) {
      const Index k = j + d;
      const double log_mag = 0.5 * (log_fact[static_cast<std::size_t>(j)] - log_fact[static_cast<std::size_t>(k)]) +
                             static_cast<double>(d) * log_abs - 0.5 * x;
      const double mag = std::exp(log_mag) * lag[static_cast<std::size_t>(j)];
      m(j, k) = std::polar(1.0, static_cast<double>(d) * phase_upper) * mag;
      if (d > 0) m(k, j) = std::polar(1.0, static_cast<double>(d) * phase_lower) * mag;
    }
  }
  return m;
}

namespace {

void require_single_mode(const DensityOperator& rho) {
  if (rho.space.modes().size() != 1 || rho.space.internal())
    throw DimensionError("Wigner function needs a single-mode density operator");
}

double wigner_value(const Matrix& rho, cplx alpha) {
  const Index dim = rho.rows();
  const Matrix d = displacement_elements(dim, 2.0 * alpha);
  // Tr[ρ D(2α) Π] = Σ_{k,j} ρ_{kj} D_{jk} (−1)^k
  cplx acc = 0.0;
  for (Index k = 0; k < dim; ++k) {
    const cplx row = rho.row(k).transpose().cwiseProduct(d.col(k)).sum();
    acc += (k % 2 == 0) ? row : -row;
  }
  return 2.0 / M_PI * acc.real();
}

double bilinear(const WignerGrid& w, double re, double im, bool& inside) {
  const Index nr = w.re_axis.size(), ni = w.im_axis.size();
  const double dre = (w.re_axis(nr - 1) - w.re_axis(0)) / static_cast<double>(nr - 1);
  const double dim = (w.im_axis(ni - 1) - w.im_axis(0)) / static_cast<double>(ni - 1);
  const double u = (re - w.re_axis(0)) / dre;
  const double v = (im - w.im_axis(0)) / dim;
  // Stay clear of the outermost cells.
  if (u < 1.0 || v < 1.0 || u > static_cast<double>(nr - 2) || v > static_cast<double>(ni - 2)) {
    inside = false;
    return 0.0;
  }
  inside = true;
  const auto j = std::min(static_cast<Index>(std::floor(u)), nr - 2);
  const auto i = std::min(static_cast<Index>(std::floor(v)), ni - 2);
  const double fu = u - static_cast<double>(j), fv = v - static_cast<double>(i);
  return (1 - fv) * ((1 - fu) * w.values(i, j) + fu * w.values(i, j + 1)) +
         fv * ((1 - fu) * w.values(i + 1, j) + fu * w.values(i + 1, j + 1));
}

}  // namespace

double wigner_at(const DensityOperator& rho, cplx alpha) {
  require_single_mode(rho);
  return wigner_value(rho.matrix, alpha);
}

WignerGrid wigner(const DensityOperator& rho, const GridSpec& grid) {
  require_single_mode(rho);
  grid.validate();
  WignerGrid w;
  w.re_axis = RealVector::LinSpaced(grid.re_points, grid.re_min, grid.re_max);
  w.im_axis = RealVector::LinSpaced(grid.im_points, grid.im_min, grid.im_max);
  w.values.resize(grid.im_points, grid.re_points);
  for (Index i = 0; i < grid.im_points; ++i)
    for (Index j = 0; j < grid.re_points; ++j)
      w.values(i, j) = wigner_value(rho.matrix, cplx(w.re_axis(j), w.im_axis(i)));
  return w;
}

WignerGrid wigner(const DensityOperator& rho) { return wigner(rho, default_grid(rho)); }

Negativity negativity(const WignerGrid& w) {
  Negativity n;
  n.min_value = w.values.minCoeff();
  n.negative_volume = -w.values.cwiseMin(0.0).sum() * w.cell_area();
  return n;
}

double rotational_symmetry_score(const WignerGrid& w, int k) {
  if (k < 1) throw std::invalid_argument("symmetry order k must be >= 1");
  const Index nr = w.re_axis.size(), ni = w.im_axis.size();
  const double tol = 1e-9 * (w.re_axis(nr - 1) - w.re_axis(0));
  if (std::abs(w.re_axis(0) + w.re_axis(nr - 1)) > tol || std::abs(w.im_axis(0) + w.im_axis(ni - 1)) > tol)
    throw std::invalid_argument("rotational symmetry needs a grid centered at the origin");
  const double phi = 2.0 * M_PI / k;
  const double c = std::cos(phi), s = std::sin(phi);
  double cross = 0.0, self = 0.0, rotated = 0.0;
  for (Index i = 1; i + 1 < ni; ++i)
    for (Index j = 1; j + 1 < nr; ++j) {
      const double x = w.re_axis(j), y = w.im_axis(i);
      // W_rot(α) = W(α e^{−iφ})
      bool inside = false;
      const double wr = bilinear(w, c * x + s * y, -s * x + c * y, inside);
      if (!inside) continue;
      const double v = w.values(i, j);
      cross += v * wr;
      self += v * v;
      rotated += wr * wr;
    }
  if (self <= 0.0 || rotated <= 0.0) return 0.0;
  return std::clamp(cross / std::sqrt(self * rotated), 0.0, 1.0);
}

std::size_t count_components(const WignerGrid& w, double fraction) {
  const Index ni = w.values.rows(), nr = w.values.cols();
  const double threshold = fraction * w.values.maxCoeff();
  std::vector<char> seen(static_cast<std::size_t>(ni * nr), 0);
  auto at = [&](Index i, Index j) -> char& { return seen[static_cast<std::size_t>(i * nr + j)]; };
  std::size_t count = 0;
  for (Index i0 = 0; i0 < ni; ++i0)
    for (Index j0 = 0; j0 < nr; ++j0) {
      if (at(i0, j0) || w.values(i0, j0) <= threshold) continue;
      ++count;
      std::queue<std::pair<Index, Index>> frontier;
      frontier.push({i0, j0});
      at(i0, j0) = 1;
      while (!frontier.empty()) {
        const auto [i, j] = frontier.front();
        frontier.pop();
        const std::pair<Index, Index> next[4] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
        for (const auto& [a, b] : next) {
          if (a < 0 || b < 0 || a >= ni || b >= nr || at(a, b) || w.values(a, b) <= threshold) continue;
          at(a, b) = 1;
          frontier.push({a, b});
        }
      }
    }
  return count;
}

RadialProfile radial_marginal(const WignerGrid& w, Index bins) {
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  double rmax = 0.0;
  for (Index i = 0; i < w.im_axis.size(); ++i)
    for (Index j = 0; j < w.re_axis.size(); ++j) rmax = std::max(rmax, std::hypot(w.re_axis(j), w.im_axis(i)));
  RadialProfile out;
  out.radius = RealVector::LinSpaced(bins, 0.5 * rmax / bins, rmax - 0.5 * rmax / bins);
  out.weight = RealVector::Zero(bins);
  const double area = w.cell_area();
  for (Index i = 0; i < w.im_axis.size(); ++i)
    for (Index j = 0; j < w.re_axis.size(); ++j) {
      const double r = std::hypot(w.re_axis(j), w.im_axis(i));
      const auto b = std::min(static_cast<Index>(r / rmax * static_cast<double>(bins)), bins - 1);
      out.weight(b) += w.values(i, j) * area;
    }
  return out;
}

RealVector re_marginal(const WignerGrid& w) {
  const double dim = (w.im_axis(w.im_axis.size() - 1) - w.im_axis(0)) / static_cast<double>(w.im_axis.size() - 1);
  return w.values.colwise().sum().transpose() * dim;
}

RevivalEstimate revival_estimate(double beta, double gamma, double lambda) {
  if (!(beta > 0.0) || !(gamma > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("revival estimate needs positive beta, gamma, lambda");
  return {2.0 * M_PI * beta / (lambda * gamma), 2.0 * M_PI * gamma / (lambda * beta)};
}

double state_overlap(const DensityOperator& rho0, const DensityOperator& rho, RecurrenceAlignment alignment) {
  if (rho0.matrix.rows() != rho.matrix.rows()) throw DimensionError("overlap: dimension mismatch");
  const Matrix& a = rho0.matrix;
  const Matrix& b = rho.matrix;
  if (alignment == RecurrenceAlignment::none) return (a * b).trace().real();

  // f(θ) = Re Σ_{j,k} a_{jk} b_{kj} e^{iθ(j−k)} = Re Σ_Δ c_Δ e^{iθΔ}
  const Index dim = a.rows();
  std::vector<cplx> coeff(static_cast<std::size_t>(2 * dim - 1), 0.0);
  for (Index j = 0; j < dim; ++j)
    for (Index k = 0; k < dim; ++k) coeff[static_cast<std::size_t>(j - k + dim - 1)] += a(j, k) * b(k, j);
  auto f = [&](double theta) {
    cplx s = 0.0;
    for (Index d = -(dim - 1); d <= dim - 1; ++d)
      s += coeff[static_cast<std::size_t>(d + dim - 1)] * std::exp(cplx(0.0, theta * static_cast<double>(d)));
    return s.real();
  };
  const int samples = 1440;
  double best_theta = 0.0, best = f(0.0);
  for (int s = 1; s < samples; ++s) {
    const double th = 2.0 * M_PI * s / samples;
    const double v = f(th);
    if (v > best) {
      best = v;
      best_theta = th;
    }
  }
  // Golden-section refinement within one grid cell either side.
  double lo = best_theta - 2.0 * M_PI / samples, hi = best_theta + 2.0 * M_PI / samples;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  return std::max({best, f1, f2});
}

std::vector<double> quasidistribution_recurrence(const Trajectory& traj, char mode, RecurrenceAlignment alignment) {
  std::vector<double> out;
  if (traj.states.empty()) return out;
  const auto& space = traj.states.front().space;
  const DensityOperator rho0 = reduce(traj.states.front(), Subsystem::mode(mode));
  out.reserve(traj.states.size());
  for (const auto& s : traj.states) {
    if (!(s.space == space)) throw DimensionError("trajectory states must share a space");
    out.push_back(state_overlap(rho0, reduce(s, Subsystem::mode(mode)), alignment));
  }
  return out;
}

}  // namespace iontrap
