#pragma once

// Wigner functions and phase-space diagnostics.
//
// Convention: W(α) = (2/π) Tr[ρ D(α) Π D†(α)], Π = (−1)^n̂, ∫ W d²α = 1 with
// d²α = d(Re α) d(Im α). Vacuum: W(0) = 2/π.

#include "iontrap/dynamics.hpp"
#include "iontrap/hilbert.hpp"

#include <vector>

namespace iontrap {

struct GridSpec {
  double re_min = -3.0;
  double re_max = 3.0;
  double im_min = -3.0;
  double im_max = 3.0;
  Index re_points = 101;
  Index im_points = 101;

  static GridSpec square(double half_width, Index points) {
    return {-half_width, half_width, -half_width, half_width, points, points};
  }
  void validate() const;
};

/// W sampled on a rectangular grid; values(i, j) at (re_axis(j), im_axis(i)).
struct WignerGrid {
  RealVector re_axis;
  RealVector im_axis;
  RealMatrix values;

  double cell_area() const;
  double riemann_sum() const;
  /// Value at α = 0 if the origin is a grid node.
  std::optional<double> value_at_origin() const;
};

/// 101×101 covering |Re α|, |Im α| ≤ max(3, 2√⟨n̂⟩ + 3).
GridSpec default_grid(const DensityOperator& rho);

/// ⟨j|D(β)|k⟩ for 0 ≤ j, k < dim, exact (not truncated-generator) elements.
Matrix displacement_elements(Index dim, cplx beta);

double wigner_at(const DensityOperator& rho, cplx alpha);
WignerGrid wigner(const DensityOperator& rho, const GridSpec& grid);
WignerGrid wigner(const DensityOperator& rho);

struct Negativity {
  double min_value = 0.0;
  double negative_volume = 0.0;
};
Negativity negativity(const WignerGrid& w);

/// Normalized correlation of W with its rotation by 2π/k (bilinear
/// resampling, outermost cells excluded), clamped to [0, 1].
double rotational_symmetry_score(const WignerGrid& w, int k);

/// Connected (4-neighbour) regions where W > fraction·max W.
std::size_t count_components(const WignerGrid& w, double fraction = 0.2);

struct RadialProfile {
  RealVector radius;
  RealVector weight;  ///< ∫ W over each annulus
};
RadialProfile radial_marginal(const WignerGrid& w, Index bins);

/// ∫ W d(Im α) as a function of Re α.
RealVector re_marginal(const WignerGrid& w);

struct RevivalEstimate {
  double t_rx = 0.0;
  double t_ry = 0.0;
};
/// t_R^(x) = 2πβ/(λγ), t_R^(y) = 2πγ/(λβ).
RevivalEstimate revival_estimate(double beta, double gamma, double lambda);

enum class RecurrenceAlignment {
  none,      ///< Tr[ρ(0) ρ(t)]
  rotation,  ///< max_θ Tr[ρ(0) R(θ) ρ(t) R(θ)†], R(θ) = e^{−iθn̂}
};

/// Overlap series of the reduced state of `mode` with its initial value.
std::vector<double> quasidistribution_recurrence(const Trajectory& traj, char mode,
                                                 RecurrenceAlignment alignment = RecurrenceAlignment::none);

/// Overlap of two single-mode density operators, optionally maximized over
/// phase-space rotations.
double state_overlap(const DensityOperator& rho0, const DensityOperator& rho,
                     RecurrenceAlignment alignment = RecurrenceAlignment::none);

}  // namespace iontrap
