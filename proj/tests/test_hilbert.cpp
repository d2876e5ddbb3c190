#include "iontrap/hilbert.hpp"

#include <doctest.h>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

using namespace iontrap;

TEST_CASE("index convention matches the Kronecker layout") {
  const HybridSpace space({{3, 'x'}, {4, 'y'}}, InternalSpace::lambda());
  CHECK(space.total_dim() == 36);
  for (Index nx = 0; nx < 3; ++nx)
    for (Index ny = 0; ny < 4; ++ny)
      for (Level l : {Level::a, Level::b, Level::c}) {
        const Index i = space.index(nx, ny, l);
        CHECK(i == (nx * 4 + ny) * 3 + space.internal()->position(l));
        CHECK(space.fock_number(i, 'x') == nx);
        CHECK(space.fock_number(i, 'y') == ny);
      }
  const auto psi = compose({fock_state({3, 'x'}, 2), fock_state({4, 'y'}, 1), level_state(InternalSpace::lambda(), Level::b)});
  CHECK(std::abs(psi.amplitudes(space.index(2, 1, Level::b)) - 1.0) < 1e-15);
  CHECK(psi.space == space);
}

TEST_CASE("ladder matrices") {
  const Index dim = 6;
  const Matrix a(annihilation_matrix(dim));
  const Matrix n(number_matrix(dim));
  CHECK((a.adjoint() * a - n).norm() < 1e-14);
  const Matrix comm = a * a.adjoint() - a.adjoint() * a;
  for (Index k = 0; k + 1 < dim; ++k) CHECK(std::abs(comm(k, k) - 1.0) < 1e-14);
  // Truncation shows only in the top corner.
  CHECK(std::abs(comm(dim - 1, dim - 1) + static_cast<double>(dim - 1)) < 1e-12);
  const Eigen::MatrixXd real_a(annihilation_matrix<double>(dim));
  CHECK(real_a(2, 3) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("fock and level states") {
  CHECK_THROWS_AS(fock_state({3, 'x'}, 3), std::out_of_range);
  CHECK_THROWS_AS(fock_state({3, 'x'}, -1), std::out_of_range);
  CHECK_THROWS(level_state(InternalSpace::two_level(), Level::c));
  CHECK(parse_level('b') == Level::b);
  CHECK(level_name(Level::c) == 'c');
  CHECK_THROWS(parse_level('q'));
}

TEST_CASE("poisson tail against direct summation") {
  for (double mean : {0.5, 4.0, 9.0}) {
    double head = 0.0, term = std::exp(-mean);
    for (Index k = 0; k < 20; ++k) {
      head += term;
      term *= mean / static_cast<double>(k + 1);
    }
    CHECK(poisson_tail(mean, 20) == doctest::Approx(1.0 - head).epsilon(1e-6));
  }
  CHECK(poisson_tail(0.0, 1) == 0.0);
}

TEST_CASE("coherent state") {
  const ModeSpace m{30, 'x'};
  const cplx alpha(1.5, -0.7);
  const auto psi = coherent_state(m, alpha);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
  const Matrix n(number_matrix(30));
  CHECK(psi.amplitudes.dot(n * psi.amplitudes).real() == doctest::Approx(std::norm(alpha)).epsilon(1e-8));
  const Matrix a(annihilation_matrix(30));
  CHECK(std::abs(psi.amplitudes.dot(a * psi.amplitudes) - alpha) < 1e-7);
  CHECK(psi.amplitudes(0).imag() == 0.0);
  CHECK(psi.amplitudes(0).real() > 0.0);
}

TEST_CASE("coherent state truncation error names a sufficient dimension") {
  const ModeSpace small{8, 'x'};
  try {
    coherent_state(small, 3.0);
    FAIL("expected TruncationError");
  } catch (const TruncationError& e) {
    CHECK(e.required_dim() > 8);
    CHECK(std::string(e.what()).find(std::to_string(e.required_dim())) != std::string::npos);
    CHECK(poisson_tail(9.0, e.required_dim()) <= default_truncation_tolerance);
    CHECK_NOTHROW(coherent_state({e.required_dim(), 'x'}, 3.0));
  }
}

TEST_CASE("displacement of the vacuum is the coherent state") {
  const ModeSpace m{40, 'y'};
  const cplx zeta(0.8, 1.1);
  const Matrix d = displacement_operator(m, zeta);
  CHECK((d.adjoint() * d - Matrix::Identity(40, 40)).norm() < 1e-12);
  const Vector from_d = d.col(0);
  const auto psi = coherent_state(m, zeta);
  CHECK((from_d - psi.amplitudes).norm() < 1e-7);
  CHECK_THROWS_AS(displacement_operator({6, 'y'}, 3.0), TruncationError);
}

TEST_CASE("leakage reads the top two levels") {
  const ModeSpace m{5, 'x'};
  Vector v = Vector::Zero(5);
  v(3) = std::sqrt(0.25);
  v(0) = std::sqrt(0.75);
  const StateVector s{HybridSpace::single(m), v};
  CHECK(leakage(s, 'x') == doctest::Approx(0.25));
  CHECK_THROWS(leakage(s, 'y'));
}

TEST_CASE("embedded operators and transitions") {
  const HybridSpace space({{3, 'x'}, {3, 'y'}}, InternalSpace::two_level());
  const Operator nx = number_operator(space, 'x');
  const auto psi = compose({fock_state({3, 'x'}, 2), fock_state({3, 'y'}, 1), level_state(InternalSpace::two_level(), Level::a)});
  CHECK(psi.amplitudes.dot(nx * psi.amplitudes).real() == doctest::Approx(2.0));
  const Operator flip = transition(space, Level::b, Level::a);
  const Vector out = flip * psi.amplitudes;
  CHECK(std::abs(out(space.index(2, 1, Level::b)) - 1.0) < 1e-15);
  const Operator pa = projector(space, Level::a), pb = projector(space, Level::b);
  CHECK(max_abs(Operator(pa + pb) - identity_matrix(space.total_dim())) < 1e-15);
  CHECK(hermiticity_defect(flip) == doctest::Approx(1.0));
  CHECK(hermiticity_defect(Operator(flip + Operator(flip.adjoint()))) == 0.0);
}

TEST_CASE("compose rejects an internal factor before a mode") {
  const auto lvl = level_state(InternalSpace::two_level(), Level::a);
  const auto mode = fock_state({2, 'x'}, 0);
  CHECK_THROWS_AS(compose({lvl, mode}), DimensionError);
  CHECK_THROWS_AS(HybridSpace({{2, 'x'}, {2, 'x'}}), DimensionError);
}
