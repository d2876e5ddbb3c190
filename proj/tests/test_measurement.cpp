#include "iontrap/measurement.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace iontrap;

namespace {

const HybridSpace kSpace({{3, 'x'}, {3, 'y'}}, InternalSpace::two_level());

StateVector ket(Index nx, Index ny, Level l) {
  return {kSpace, Vector::Unit(kSpace.total_dim(), kSpace.index(nx, ny, l))};
}

StateVector superpose(const StateVector& a, const StateVector& b, cplx ca, cplx cb) {
  return {a.space, ca * a.amplitudes + cb * b.amplitudes};
}

DensityOperator single_mode(const Vector& v) {
  return {HybridSpace::single({v.size(), 'x'}), v * v.adjoint()};
}

Vector squeezed_vacuum(Index dim, double r) {
  const Matrix a(annihilation_matrix(dim));
  const Matrix gen = 0.5 * r * (a * a - a.adjoint() * a.adjoint());
  return gen.exp().col(0);
}

}  // namespace

TEST_CASE("partial traces") {
  // (|1,0,a⟩ + |0,1,b⟩)/√2
  const auto psi = superpose(ket(1, 0, Level::a), ket(0, 1, Level::b), M_SQRT1_2, M_SQRT1_2);
  const auto rho_x = reduce(psi, Subsystem::mode('x'));
  CHECK(rho_x.matrix.rows() == 3);
  CHECK(rho_x.matrix(0, 0).real() == doctest::Approx(0.5));
  CHECK(rho_x.matrix(1, 1).real() == doctest::Approx(0.5));
  CHECK(std::abs(rho_x.matrix(0, 1)) < 1e-15);
  CHECK(purity(rho_x) == doctest::Approx(0.5));
  const std::vector<Subsystem> modes{Subsystem::mode('x'), Subsystem::mode('y')};
  const auto rho_xy = reduce(psi, modes);
  CHECK(purity(rho_xy) == doctest::Approx(0.5));
  const auto rho_int = reduce(psi, Subsystem::internal_levels());
  CHECK(rho_int.matrix.rows() == 2);
  CHECK(atomic_inversion(rho_int) == doctest::Approx(0.0).scale(1.0));
  // Reducing the full density operator agrees with reducing the ket.
  const auto rho_x2 = reduce(pure_density(psi), Subsystem::mode('x'));
  CHECK((rho_x2.matrix - rho_x.matrix).norm() < 1e-15);
  const std::vector<Subsystem> all{Subsystem::mode('x'), Subsystem::mode('y'), Subsystem::internal_levels()};
  CHECK(purity(reduce(psi, all)) == doctest::Approx(1.0));
}

TEST_CASE("conditional projection on the internal levels") {
  const auto ghz = superpose(ket(1, 0, Level::a), ket(0, 1, Level::b), M_SQRT1_2, cplx(0.0, -M_SQRT1_2));
  const auto rec = project_internal(ghz, Level::a);
  CHECK(rec.outcome == Level::a);
  CHECK(rec.probability == doctest::Approx(0.5));
  CHECK(rec.post_state.space == HybridSpace::two_mode(3, 3));
  CHECK(rec.post_state.norm() == doctest::Approx(1.0));
  CHECK(std::norm(rec.post_state.amplitudes(rec.post_state.space.index(1, 0))) == doctest::Approx(1.0));
  CHECK_THROWS_AS(project_internal(ket(1, 0, Level::a), Level::b), std::domain_error);
  CHECK_THROWS_AS(project_internal({HybridSpace::two_mode(2, 2), Vector::Unit(4, 0)}, Level::a), DimensionError);
}

TEST_CASE("atomic inversion by two routes") {
  const auto psi = superpose(ket(2, 0, Level::a), ket(1, 1, Level::b), std::sqrt(0.8), cplx(0.0, std::sqrt(0.2)));
  CHECK(atomic_inversion(psi) == doctest::Approx(0.6));
  CHECK(atomic_inversion(reduce(psi, Subsystem::internal_levels())) == doctest::Approx(0.6));
}

TEST_CASE("number distribution") {
  const auto psi = superpose(ket(2, 0, Level::a), ket(1, 1, Level::b), std::sqrt(0.8), std::sqrt(0.2));
  const auto rho = reduce(psi, Subsystem::mode('x'));
  const RealVector p = number_distribution(rho);
  CHECK(p(2) == doctest::Approx(0.8));
  CHECK(p(1) == doctest::Approx(0.2));
  CHECK(mean_number(rho) == doctest::Approx(1.8));
}

TEST_CASE("quadrature variances") {
  const Index dim = 60;
  const auto vac = single_mode(Vector::Unit(dim, 0));
  for (double th : {0.0, 0.4, 1.3}) CHECK(quadrature_variance(vac, th) == doctest::Approx(0.5));
  const auto coh = single_mode(coherent_state({dim, 'x'}, cplx(1.2, 0.5)).amplitudes);
  for (double th : {0.0, 0.9}) CHECK(quadrature_variance(coh, th) == doctest::Approx(0.5).epsilon(1e-9));
  const auto fock = single_mode(Vector::Unit(dim, 3));
  CHECK(quadrature_variance(fock, 0.7) == doctest::Approx(3.5));
  const double r = 0.6;
  const auto sq = single_mode(squeezed_vacuum(dim, r));
  CHECK(quadrature_variance(sq, 0.0) == doctest::Approx(0.5 * std::exp(-2 * r)).epsilon(1e-9));
  CHECK(quadrature_variance(sq, M_PI / 2) == doctest::Approx(0.5 * std::exp(2 * r)).epsilon(1e-9));
  const auto best = optimal_quadrature_variance(sq);
  CHECK(best.variance == doctest::Approx(0.5 * std::exp(-2 * r)).epsilon(1e-9));
  CHECK(quadrature_variance(sq, best.theta) == doctest::Approx(best.variance).epsilon(1e-9));
  CHECK(optimal_quadrature_variance(coh).variance == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("fidelities") {
  const auto a = ket(1, 0, Level::a);
  const auto psi = superpose(a, ket(0, 1, Level::b), std::sqrt(0.3), std::sqrt(0.7));
  CHECK(fidelity(psi, a) == doctest::Approx(0.3));
  CHECK(fidelity(pure_density(psi), a) == doctest::Approx(0.3));
  CHECK(fidelity(pure_density(psi), pure_density(a)) == doctest::Approx(0.3));
  const auto rho = reduce(psi, Subsystem::mode('x'));
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0));
}

TEST_CASE("local maxima") {
  RealVector p(7);
  p << 0.1, 0.3, 0.1, 0.05, 0.2, 0.15, 0.1;
  CHECK(count_local_maxima(p) == 2);
  CHECK(count_local_maxima(p, 1, 0.25) == 1);
  // Odd entries zeroed by a selection rule: stride 2 sees one peak.
  RealVector q(8);
  q << 0.0, 0.1, 0.0, 0.3, 0.0, 0.4, 0.0, 0.2;
  CHECK(count_local_maxima(q) == 4);
  CHECK(count_local_maxima(q, 2) == 1);
  CHECK_THROWS_AS(count_local_maxima(q, 0), std::invalid_argument);
}

TEST_CASE("parity") {
  CHECK(parity_expectation(single_mode(Vector::Unit(6, 3))) == doctest::Approx(-1.0));
  const auto coh = single_mode(coherent_state({50, 'x'}, 1.1).amplitudes);
  CHECK(parity_expectation(coh) == doctest::Approx(std::exp(-2 * 1.21)).epsilon(1e-9));
}
