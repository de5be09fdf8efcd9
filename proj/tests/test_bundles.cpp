#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "holoq/bundles.hpp"
#include "holoq/tripod.hpp"

#include <cmath>

using namespace holoq;
using namespace holoq::bundles;

namespace {

biortho::BiorthoSystem tripod_system() {
  tripod::U1Chart c{1.0, 0.7, 1.0};
  auto p = tripod::params_for_u1(c, 0.6, 1.0);
  return biortho::biorthogonal_eig(tripod::build_hamiltonian(p));
}

biortho::MetricOperator diag_metric(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return biortho::MetricOperator::from_matrix(m);
}

double frame_residual(const StiefelFrame& f) {
  ComplexMatrix vddag = frame_pseudo_adjoint(f);
  Eigen::Index nl = f.V.cols();
  return (vddag * f.V - ComplexMatrix::Identity(nl, nl)).norm();
}

}  // namespace

TEST_CASE("stiefel frame") {
  SUBCASE("Hermitian system gives an ordinary orthonormal frame") {
    ComplexMatrix H(3, 3);
    H << 1, 0, 0, 0, 2, 0, 0, 0, 5;
    auto sys = biortho::biorthogonal_eig(H);
    auto f = stiefel_frame(sys, Complex(2.0));
    CHECK(f.V.cols() == 1);
    CHECK((f.V.adjoint() * f.V - ComplexMatrix::Identity(1, 1)).norm() < 1e-12);
    CHECK(frame_residual(f) < 1e-10);
  }
  SUBCASE("tripod dark block gives a 4x2 biorthogonal frame") {
    auto f = stiefel_frame(tripod_system(), Complex(0.0));
    CHECK(f.V.rows() == 4);
    CHECK(f.V.cols() == 2);
    CHECK(frame_residual(f) < 1e-10);
  }
  SUBCASE("missing level throws") {
    CHECK_THROWS_AS(stiefel_frame(tripod_system(), Complex(7.0)), LevelNotFound);
  }
  SUBCASE("nontrivial eta_small keeps the frame property") {
    auto eta_a = diag_metric(2.0, 0.5);
    auto f = stiefel_frame(tripod_system(), Complex(0.0), &eta_a);
    CHECK(frame_residual(f) < 1e-10);
  }
}

TEST_CASE("frame pseudo-adjoint") {
  SUBCASE("identity metrics reduce to the conjugate transpose") {
    ComplexMatrix H(3, 3);
    H << 2, 0, 0, 0, 3, 0, 0, 0, 4;
    auto sys = biortho::biorthogonal_eig(H);
    auto f = stiefel_frame(sys, Complex(3.0));
    CHECK((frame_pseudo_adjoint(f) - f.V.adjoint()).norm() < 1e-12);
  }
  SUBCASE("tripod dark frame rows are the tilde dark states") {
    tripod::U1Chart c{1.0, 0.7, 1.0};
    auto p = tripod::params_for_u1(c, 0.6, 1.0);
    auto s = tripod::dark_bright_states_u1(c, p);
    // assemble the frame directly from the analytic states
    StiefelFrame f;
    f.V = ComplexMatrix(4, 2);
    f.V << s.D1, s.D2;
    f.eta_big = tripod::metric(p);
    f.eta_small = biortho::MetricOperator::identity(2);
    ComplexMatrix vddag = frame_pseudo_adjoint(f);
    CHECK((vddag.row(0).adjoint() - s.tD1).norm() < 1e-12);
    CHECK((vddag.row(1).adjoint() - s.tD2).norm() < 1e-12);
  }
  SUBCASE("composite rule (VU)^ddag = U^ddag V^ddag") {
    auto eta_a = diag_metric(1.5, 0.8);
    auto f = stiefel_frame(tripod_system(), Complex(0.0), &eta_a);
    ComplexMatrix U = random_pseudo_unitary(eta_a, 99, 0.7);
    StiefelFrame moved = f;
    moved.V = f.V * U;
    ComplexMatrix lhs = frame_pseudo_adjoint(moved);
    ComplexMatrix uddag = eta_a.inverse * U.adjoint() * eta_a.matrix;
    CHECK((lhs - uddag * frame_pseudo_adjoint(f)).norm() < 1e-12);
  }
}

TEST_CASE("grassmann projector") {
  SUBCASE("full frame gives the identity") {
    auto [H, eta] = biortho::random_pseudo_hermitian(3, 7);
    auto sys = biortho::biorthogonal_eig(H);
    // union of all blocks: build from the full frames directly
    StiefelFrame f;
    f.V = sys.right_frame;
    f.eta_big = biortho::metric_from_left(sys);
    f.eta_small = biortho::MetricOperator::identity(3);
    CHECK((grassmann_projector(f).Pi - ComplexMatrix::Identity(3, 3)).norm() < 1e-10);
  }
  SUBCASE("tripod dark block: trace 2, annihilates brights, all conditions") {
    tripod::U1Chart c{0.9, 1.3, 1.0};
    auto p = tripod::params_for_u1(c, 0.6, 1.0);
    auto sys = biortho::biorthogonal_eig(tripod::build_hamiltonian(p));
    auto f = stiefel_frame(sys, Complex(0.0));
    ComplexMatrix Pi = grassmann_projector(f).Pi;
    CHECK(std::abs(Pi.trace() - Complex(2.0)) < 1e-10);
    CHECK((Pi * Pi - Pi).norm() < 1e-10);
    ComplexMatrix pi_ddag = f.eta_big.inverse * Pi.adjoint() * f.eta_big.matrix;
    CHECK((pi_ddag - Pi).norm() < 1e-10);
    auto s = tripod::dark_bright_states_u1(c, p);
    CHECK((Pi * s.Bplus).norm() < 1e-10);
    CHECK((Pi * s.Bminus).norm() < 1e-10);
    CHECK((Pi * s.D1 - s.D1).norm() < 1e-10);
    // metric compatibility
    CHECK((Pi.adjoint() * f.eta_big.matrix - f.eta_big.matrix * Pi).norm() < 1e-10);
  }
  SUBCASE("rank-1 block reduces to the pure-state dyad") {
    auto [H, eta] = biortho::random_pseudo_hermitian(4, 21);
    auto sys = biortho::biorthogonal_eig(H);
    auto f = stiefel_frame(sys, sys.eigenvalues(2));
    ComplexMatrix Pi = grassmann_projector(f).Pi;
    ComplexMatrix dyad = sys.right_frame.col(2) * sys.left_frame.col(2).adjoint();
    CHECK((Pi - dyad).norm() < 1e-10);
    CHECK(std::abs(Pi.trace() - Complex(1.0)) < 1e-10);
  }
}

TEST_CASE("group action invariance") {
  auto sys = tripod_system();
  SUBCASE("identity does nothing") {
    auto f = stiefel_frame(sys, Complex(0.0));
    CHECK(group_action_invariance(f, ComplexMatrix::Identity(2, 2)) < 1e-14);
  }
  SUBCASE("random unitary with identity eta_small") {
    auto f = stiefel_frame(sys, Complex(0.0));
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
      ComplexMatrix U =
          random_pseudo_unitary(biortho::MetricOperator::identity(2), seed);
      CHECK((U.adjoint() * U - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
      CHECK(group_action_invariance(f, U) < 1e-12);
    }
  }
  SUBCASE("pseudo-unitary generated from a nontrivial eta_small") {
    auto eta_a = diag_metric(3.0, 0.25);
    auto f = stiefel_frame(sys, Complex(0.0), &eta_a);
    for (std::uint64_t seed : {11u, 12u, 13u}) {
      ComplexMatrix U = random_pseudo_unitary(eta_a, seed, 0.9);
      CHECK(biortho::pseudo_unitarity_residual(U, eta_a) < 1e-12);
      CHECK(group_action_invariance(f, U) < 1e-10);
    }
  }
  SUBCASE("non-pseudo-unitary input throws") {
    auto f = stiefel_frame(sys, Complex(0.0));
    CHECK_THROWS_AS(group_action_invariance(f, 2.0 * ComplexMatrix::Identity(2, 2)),
                    NotPseudoUnitary);
  }
  SUBCASE("same projection implies frames related by a pseudo-unitary") {
    auto eta_a = diag_metric(1.7, 0.6);
    auto f1 = stiefel_frame(sys, Complex(0.0), &eta_a);
    ComplexMatrix U = random_pseudo_unitary(eta_a, 31, 0.5);
    StiefelFrame f2 = f1;
    f2.V = f1.V * U;
    // recover the transition matrix and check it is pseudo-unitary
    ComplexMatrix trans = frame_pseudo_adjoint(f1) * f2.V;
    CHECK((trans - U).norm() < 1e-10);
    CHECK(biortho::pseudo_unitarity_residual(trans, eta_a) < 1e-10);
  }
}
