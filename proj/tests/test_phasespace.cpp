#include "iontrap/measurement.hpp"
#include "iontrap/phasespace.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace iontrap;

namespace {

DensityOperator mode_rho(const Vector& v) { return {HybridSpace::single({v.size(), 'x'}), v * v.adjoint()}; }

DensityOperator fock_rho(Index dim, Index n) { return mode_rho(Vector::Unit(dim, n)); }

Vector cat(Index dim, cplx beta) {
  const ModeSpace m{dim, 'x'};
  return (coherent_state(m, beta).amplitudes + coherent_state(m, -beta).amplitudes).normalized();
}

double hermite(int n, double x) {
  double h0 = 1.0, h1 = 2.0 * x;
  if (n == 0) return h0;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

}  // namespace

TEST_CASE("displacement elements match the exponential of the generator") {
  const Index big = 90, dim = 20;
  const Matrix a(annihilation_matrix(big));
  for (cplx beta : {cplx(0.0, 0.0), cplx(0.7, -0.4), cplx(-1.9, 1.2)}) {
    const Matrix gen = beta * a.adjoint() - std::conj(beta) * a;
    const Matrix ref = gen.exp().topLeftCorner(dim, dim);
    CHECK((displacement_elements(dim, beta) - ref).cwiseAbs().maxCoeff() < 1e-11);
  }
  // Large arguments stay bounded and unitary columns stay normalized up to truncation.
  const Matrix far = displacement_elements(60, cplx(5.0, 3.0));
  CHECK(far.allFinite());
  CHECK(far.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("Wigner values at the origin") {
  CHECK(wigner_at(fock_rho(10, 0), 0.0) == doctest::Approx(2.0 / M_PI));
  for (Index n : {1, 2, 5, 9}) {
    const double expected = (n % 2 == 0 ? 2.0 : -2.0) / M_PI;
    CHECK(wigner_at(fock_rho(12, n), 0.0) == doctest::Approx(expected));
  }
  const cplx beta(0.6, -0.8);
  const auto coh = mode_rho(coherent_state({40, 'x'}, beta).amplitudes);
  const cplx alpha(0.1, 0.3);
  CHECK(wigner_at(coh, alpha) == doctest::Approx(2.0 / M_PI * std::exp(-2.0 * std::norm(alpha - beta))).epsilon(1e-9));
}

TEST_CASE("grid bookkeeping") {
  const auto w = wigner(fock_rho(8, 0), GridSpec::square(4.0, 81));
  CHECK(w.values.rows() == 81);
  CHECK(w.values.cols() == 81);
  CHECK(w.cell_area() == doctest::Approx(0.01));
  CHECK(w.riemann_sum() == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(w.value_at_origin());
  CHECK(*w.value_at_origin() == doctest::Approx(2.0 / M_PI));
  CHECK_FALSE(wigner(fock_rho(8, 0), GridSpec::square(4.0, 80)).value_at_origin());
  GridSpec bad = GridSpec::square(1.0, 1);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(wigner(fock_rho(8, 0), bad), std::invalid_argument);
  const auto dflt = default_grid(mode_rho(coherent_state({60, 'x'}, 3.0).amplitudes));
  CHECK(dflt.re_max == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(dflt.re_points == 101);
  CHECK(default_grid(fock_rho(4, 0)).re_max == doctest::Approx(3.0));
}

TEST_CASE("marginal reproduces the Hermite-function density") {
  const Index n = 2;
  const auto w = wigner(fock_rho(10, n), GridSpec::square(5.0, 201));
  const RealVector marg = re_marginal(w);
  double worst = 0.0;
  for (Index j = 0; j < w.re_axis.size(); ++j) {
    const double q = std::sqrt(2.0) * w.re_axis(j);
    const double psi = hermite(n, q) * std::exp(-0.5 * q * q) / std::sqrt(std::sqrt(M_PI) * 8.0);
    worst = std::max(worst, std::abs(marg(j) - std::sqrt(2.0) * psi * psi));
  }
  CHECK(worst < 2e-2);
}

TEST_CASE("negativity") {
  const auto vac = negativity(wigner(fock_rho(6, 0), GridSpec::square(4.0, 81)));
  CHECK(vac.negative_volume == doctest::Approx(0.0));
  const auto one = negativity(wigner(fock_rho(6, 1), GridSpec::square(4.0, 81)));
  CHECK(one.min_value == doctest::Approx(-2.0 / M_PI));
  CHECK(one.negative_volume > 0.1);
}

TEST_CASE("rotational symmetry scores") {
  const auto grid = GridSpec::square(4.0, 101);
  CHECK(rotational_symmetry_score(wigner(fock_rho(6, 0), grid), 3) > 0.999);
  CHECK(rotational_symmetry_score(wigner(fock_rho(6, 3), grid), 7) > 0.999);
  const double b = 0.5;
  const auto coh = wigner(mode_rho(coherent_state({40, 'x'}, b).amplitudes), grid);
  CHECK(rotational_symmetry_score(coh, 2) == doctest::Approx(std::exp(-4.0 * b * b)).epsilon(1e-2));
  CHECK(rotational_symmetry_score(coh, 1) == doctest::Approx(1.0));
  const auto c = wigner(mode_rho(cat(50, cplx(0.0, 2.0))), GridSpec::square(5.0, 101));
  CHECK(rotational_symmetry_score(c, 2) > 0.99);
  CHECK(rotational_symmetry_score(c, 4) < 0.5);
  CHECK_THROWS_AS(rotational_symmetry_score(coh, 0), std::invalid_argument);
  const GridSpec shifted{-2.0, 4.0, -3.0, 3.0, 61, 61};
  CHECK_THROWS_AS(rotational_symmetry_score(wigner(fock_rho(6, 0), shifted), 2), std::invalid_argument);
}

TEST_CASE("connected components") {
  const auto grid = GridSpec::square(5.0, 101);
  CHECK(count_components(wigner(fock_rho(6, 0), grid)) == 1);
  const ModeSpace m{50, 'x'};
  const Vector plus = coherent_state(m, 2.5).amplitudes, minus = coherent_state(m, -2.5).amplitudes;
  const DensityOperator mixture{HybridSpace::single(m), 0.5 * (plus * plus.adjoint() + minus * minus.adjoint())};
  CHECK(count_components(wigner(mixture, grid)) == 2);
  // The even cat adds interference fringes taller than its two lobes.
  CHECK(count_components(wigner(mode_rho(cat(50, 2.5)), grid)) > 2);
  // Fock |1⟩ is positive on a ring around its negative core.
  CHECK(count_components(wigner(fock_rho(6, 1), grid)) == 1);
}

TEST_CASE("radial marginal") {
  const auto w = wigner(fock_rho(8, 0), GridSpec::square(4.0, 101));
  const auto prof = radial_marginal(w, 20);
  CHECK(prof.radius.size() == 20);
  CHECK(prof.weight.sum() == doctest::Approx(w.riemann_sum()));
  Index peak = 0;
  prof.weight.maxCoeff(&peak);
  // Vacuum radial density 4r e^{−2r²} peaks at r = 1/2.
  CHECK(std::abs(prof.radius(peak) - 0.5) < 0.3);
  CHECK_THROWS_AS(radial_marginal(w, 0), std::invalid_argument);
}

TEST_CASE("revival estimate") {
  const auto r = revival_estimate(3.0, 3.0, 1.0);
  CHECK(r.t_rx == doctest::Approx(2 * M_PI));
  CHECK(r.t_ry == doctest::Approx(2 * M_PI));
  const auto s = revival_estimate(2.0, 4.0, 0.5);
  CHECK(s.t_rx == doctest::Approx(2 * M_PI));
  CHECK(s.t_ry == doctest::Approx(8 * M_PI));
  CHECK_THROWS_AS(revival_estimate(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("state overlap and rotation alignment") {
  const Index dim = 40;
  const cplx beta(1.5, 0.0);
  const auto rho0 = mode_rho(coherent_state({dim, 'x'}, beta).amplitudes);
  const auto turned = mode_rho(coherent_state({dim, 'x'}, beta * std::exp(cplx(0.0, 1.1))).amplitudes);
  CHECK(state_overlap(rho0, rho0) == doctest::Approx(1.0));
  CHECK(state_overlap(rho0, turned) < 0.5);
  CHECK(state_overlap(rho0, turned, RecurrenceAlignment::rotation) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(state_overlap(rho0, fock_rho(10, 0)), DimensionError);
}

TEST_CASE("recurrence series") {
  // An entangled eigenstate of the exchange keeps its reduced state.
  const HybridSpace space = HybridSpace::two_mode(4, 4);
  Matrix hd = Matrix::Zero(16, 16);
  hd(space.index(1, 0), space.index(0, 1)) = 1.0;
  hd(space.index(0, 1), space.index(1, 0)) = 1.0;
  Vector eig = Vector::Zero(16);
  eig(space.index(1, 0)) = M_SQRT1_2;
  eig(space.index(0, 1)) = M_SQRT1_2;
  const auto times = linspace(0.0, 2.0, 5);
  const auto traj = trajectory({space, eig}, hd.sparseView(), times, {});
  const auto series = quasidistribution_recurrence(traj, 'x');
  REQUIRE(series.size() == 5);
  for (double v : series) CHECK(v == doctest::Approx(0.5));
  const auto rho_x = reduce(StateVector{space, eig}, Subsystem::mode('x'));
  CHECK(series.front() == doctest::Approx(purity(rho_x)));
}
