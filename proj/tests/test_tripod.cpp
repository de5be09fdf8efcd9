#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "holoq/biortho.hpp"
#include "holoq/tripod.hpp"

#include <cmath>

using namespace holoq;
using namespace holoq::tripod;

namespace {
const Complex kI(0, 1);

TripodParams generic_params() {
  return TripodParams{0.6, 1.0, Complex(0.8, 0.1), Complex(-0.4, 0.55), Complex(0.3, -0.2)};
}
}  // namespace

TEST_CASE("dyadic and gain/loss constructions agree") {
  for (double ratio : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    TripodParams p = generic_params();
    p.alpha = ratio;
    CHECK((build_hamiltonian(p) - build_hamiltonian_gainloss(p)).norm() < 1e-12);
  }
}

TEST_CASE("spectrum is {0, 0, +kbar, -kbar} and real") {
  TripodParams p = generic_params();
  auto sys = biortho::biorthogonal_eig(build_hamiltonian(p));
  double kbar = p.kappa_bar();
  CHECK(std::abs(sys.eigenvalues(0) + kbar) < 1e-10);
  CHECK(std::abs(sys.eigenvalues(1)) < 1e-10);
  CHECK(std::abs(sys.eigenvalues(2)) < 1e-10);
  CHECK(std::abs(sys.eigenvalues(3) - kbar) < 1e-10);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(sys.eigenvalues(i).imag()) < 1e-10);
}

TEST_CASE("H is pseudo-Hermitian under the analytic metric") {
  TripodParams p = generic_params();
  CHECK(biortho::pseudo_hermiticity_residual(build_hamiltonian(p), metric(p)) < 1e-12);
}

TEST_CASE("small alpha approaches a Hermitian coupling matrix") {
  // the anti-Hermitian part scales with alpha
  TripodParams p{1e-3, 1.0, 0.7, -0.4, 0.3};
  ComplexMatrix H = build_hamiltonian(p);
  CHECK((H - H.adjoint()).norm() < 1e-2);
  TripodParams p2{0.5, 1.0, 0.7, -0.4, 0.3};
  ComplexMatrix H2 = build_hamiltonian(p2);
  CHECK((H2 - H2.adjoint()).norm() > 0.1);
}

TEST_CASE("parameter domain guards") {
  CHECK_THROWS_AS(build_hamiltonian({1.2, 1.0, 1.0, 0.0, 0.0}), ParamDomain);
  CHECK_THROWS_AS(build_hamiltonian({0.9999, 1.0, 1.0, 0.0, 0.0}), ParamDomain);
  CHECK_THROWS_AS(build_hamiltonian({1e-9, 1.0, 1.0, 0.0, 0.0}), ParamDomain);
  CHECK_THROWS_AS(build_hamiltonian({0.5, 1.0, 0.0, 0.0, 0.0}), ParamDomain);
}

TEST_CASE("eigenframe") {
  TripodParams p = generic_params();
  Eigenframe f = eigenframe(p);
  SUBCASE("normalization factor at alpha=0.6, delta=1") {
    // N1 = 1/sqrt(2*0.8*0.2) = 1/sqrt(0.32)
    CHECK(std::abs(f.E(2).real() * std::sqrt(0.32) - 0.6) < 1e-14);
  }
  SUBCASE("biorthonormality of the printed frame") {
    ComplexMatrix R(4, 4), L(4, 4);
    R << f.E, f.G0, f.Gminus, f.Gplus;
    L << f.tE, f.tG0, f.tGminus, f.tGplus;
    CHECK((L.adjoint() * R - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  SUBCASE("<E~|E> = 1 and <G~-|G+> = 0") {
    CHECK(std::abs(f.tE.dot(f.E) - 1.0) < 1e-12);
    CHECK(std::abs(f.tGminus.dot(f.Gplus)) < 1e-12);
  }
}

TEST_CASE("metric") {
  TripodParams p = generic_params();
  auto eta = metric(p);
  SUBCASE("dark/bright and E/G dyad forms agree") {
    U1Chart c{1.3, 0.8, 1.0};
    auto pc = params_for_u1(c, p.alpha, p.delta);
    DarkBright s = dark_bright_states_u1(c, pc);
    ComplexMatrix eta_db = s.tD1 * s.tD1.adjoint() + s.tD2 * s.tD2.adjoint() +
                           s.tBplus * s.tBplus.adjoint() +
                           s.tBminus * s.tBminus.adjoint();
    CHECK((eta_db - metric(pc).matrix).norm() < 1e-12);
  }
  SUBCASE("Hermitian positive-definite") {
    CHECK(eta.hermiticity_residual < 1e-14);
    CHECK(eta.min_eigenvalue > 0.0);
  }
  SUBCASE("chart-independent at fixed alpha") {
    auto pa = params_for_u1({0.4, 1.0, 1.0}, 0.6, 1.0);
    auto pb = params_for_u1({2.7, 5.1, 1.0}, 0.6, 1.0);
    CHECK((metric(pa).matrix - metric(pb).matrix).norm() < 1e-12);
  }
}

TEST_CASE("U1 dark and bright states") {
  double alpha = 0.6, delta = 1.0;
  U1Chart c{1.1, 2.3, 1.4};
  auto p = params_for_u1(c, alpha, delta);
  ComplexMatrix H = build_hamiltonian(p);
  DarkBright s = dark_bright_states_u1(c, p);
  Eigenframe f = eigenframe(p);

  SUBCASE("dark states are annihilated") {
    CHECK((H * s.D1).norm() < 1e-10);
    CHECK((H * s.D2).norm() < 1e-10);
  }
  SUBCASE("bright states carry +-kappa") {
    CHECK((H * s.Bplus - c.kappa * s.Bplus).norm() < 1e-10);
    CHECK((H * s.Bminus + c.kappa * s.Bminus).norm() < 1e-10);
  }
  SUBCASE("D1 = G- always; D2 = G+ at theta=0") {
    CHECK((s.D1 - f.Gminus).norm() < 1e-14);
    U1Chart c0{0.0, 0.0, 1.4};
    DarkBright s0 = dark_bright_states_u1(c0, params_for_u1(c0, alpha, delta));
    CHECK((s0.D2 - f.Gplus).norm() < 1e-14);
  }
  SUBCASE("dark-bright biorthogonality") {
    CHECK(std::abs(s.tD1.dot(s.Bplus)) < 1e-12);
    CHECK(std::abs(s.tD2.dot(s.Bplus)) < 1e-12);
    CHECK(std::abs(s.tD1.dot(s.Bminus)) < 1e-12);
    CHECK(std::abs(s.tD2.dot(s.Bminus)) < 1e-12);
    CHECK(std::abs(s.tD1.dot(s.D1) - 1.0) < 1e-12);
    CHECK(std::abs(s.tD2.dot(s.D2) - 1.0) < 1e-12);
    CHECK(std::abs(s.tBplus.dot(s.Bplus) - 1.0) < 1e-12);
    CHECK(std::abs(s.tBminus.dot(s.Bminus) - 1.0) < 1e-12);
  }
}

TEST_CASE("U2 dark states") {
  double alpha = 0.5, delta = 1.0;
  SUBCASE("plug-in at the chart origin") {
    U2Chart c{0.0, 0.0, 1.0};
    auto p = params_for_u2(c, alpha, delta);
    DarkPair s = dark_states_u2(c, p);
    Eigenframe f = eigenframe(p);
    CHECK((s.D1 - f.Gminus).norm() < 1e-14);
    CHECK((s.D2 - f.Gplus).norm() < 1e-14);
  }
  SUBCASE("annihilated by H and biorthonormal at a generic point") {
    U2Chart c{0.9, 2.1, 1.3};
    auto p = params_for_u2(c, alpha, delta);
    ComplexMatrix H = build_hamiltonian(p);
    DarkPair s = dark_states_u2(c, p);
    CHECK((H * s.D1).norm() < 1e-10);
    CHECK((H * s.D2).norm() < 1e-10);
    CHECK(std::abs(s.tD1.dot(s.D1) - 1.0) < 1e-12);
    CHECK(std::abs(s.tD2.dot(s.D2) - 1.0) < 1e-12);
    CHECK(std::abs(s.tD1.dot(s.D2)) < 1e-12);
    CHECK(std::abs(s.tD2.dot(s.D1)) < 1e-12);
  }
}

TEST_CASE("chart couplings") {
  SUBCASE("U1 printed values") {
    auto [k0, kp, km] = u1_chart_couplings({0.0, 0.0, 2.0});
    CHECK(std::abs(k0 - 2.0) < 1e-15);
    CHECK(std::abs(kp) < 1e-15);
    CHECK(std::abs(km) < 1e-15);
  }
  SUBCASE("U2 at theta=pi/2, phi=0 gives (0, 0, kappa)") {
    auto [k0, kp, km] = u2_chart_couplings({M_PI / 2, 0.0, 1.0});
    CHECK(std::abs(k0) < 1e-15);
    CHECK(std::abs(kp) < 1e-15);
    CHECK(std::abs(km - 1.0) < 1e-15);
  }
  SUBCASE("sum of |kappa_c|^2 equals kappa^2 on a grid") {
    for (double th = 0.0; th <= M_PI; th += M_PI / 7)
      for (double ph = 0.0; ph < 2 * M_PI; ph += M_PI / 3) {
        auto [a0, ap, am] = u1_chart_couplings({th, ph, 1.7});
        CHECK(std::abs(std::norm(a0) + std::norm(ap) + std::norm(am) - 1.7 * 1.7) <
              1e-12);
        auto [b0, bp, bm] = u2_chart_couplings({th, ph, 1.7});
        CHECK(std::abs(std::norm(b0) + std::norm(bp) + std::norm(bm) - 1.7 * 1.7) <
              1e-12);
      }
  }
}

TEST_CASE("gate_u1") {
  SUBCASE("zero-area loop gives the identity") {
    gauge::ParamLoop flat = rectangle_loop(0.0, 2 * M_PI);
    auto rep = gate_u1(flat, 0.6, 1.0, 1.0, 200);
    CHECK(std::abs(rep.beta) < 1e-12);
    CHECK((rep.gate - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
  }
  SUBCASE("rectangle at theta0 = pi/2 gives beta1 = -pi") {
    auto rep = gate_u1(rectangle_loop(M_PI / 2, 2 * M_PI), 0.6, 1.0, 1.0, 400);
    CHECK(rep.beta == doctest::Approx(-M_PI).epsilon(1e-10));
    CHECK(rep.discrepancy < 1e-6);
  }
}

TEST_CASE("gate_u2") {
  SUBCASE("zero-area loop gives the identity") {
    auto rep = gate_u2(rectangle_loop(0.0, 2 * M_PI), 0.6, 1.0, 1.0, 200);
    CHECK((rep.gate - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
  }
  SUBCASE("rectangle at theta0 = pi/3 gives beta2 = -pi") {
    auto rep = gate_u2(rectangle_loop(M_PI / 3, 2 * M_PI), 0.6, 1.0, 1.0, 400);
    CHECK(rep.beta == doctest::Approx(-M_PI).epsilon(1e-10));
    CHECK(rep.discrepancy < 1e-6);
  }
  SUBCASE("gate is a real orthogonal rotation") {
    auto rep = gate_u2(rectangle_loop(0.7, 2 * M_PI), 0.6, 1.0, 1.0, 200);
    CHECK(rep.gate.imag().norm() < 1e-14);
    CHECK((rep.gate.transpose() * rep.gate - ComplexMatrix::Identity(2, 2)).norm() <
          1e-12);
  }
}

TEST_CASE("commutator identity") {
  CHECK(commutator_check(0.0, 1.3) < 1e-15);   // U1 = identity
  CHECK(commutator_check(2.1, M_PI) < 1e-12);  // sin(beta2) = 0
  CHECK(commutator_check(M_PI / 2, M_PI / 4) < 1e-12);
  for (double b1 = 0.1; b1 < 6.2; b1 += 0.7)
    for (double b2 = 0.1; b2 < 6.2; b2 += 0.7) CHECK(commutator_check(b1, b2) < 1e-12);
  // nonzero witness
  ComplexMatrix u1 = ComplexMatrix::Identity(2, 2);
  u1(1, 1) = std::exp(kI * 1.0);
  ComplexMatrix u2 = exp_i_beta_sigma_y(0.7);
  CHECK((u1 * u2 - u2 * u1).norm() > 1e-3);
}

TEST_CASE("hermitian counterpart") {
  TripodParams p = generic_params();
  auto hc = hermitian_counterpart(p);
  ComplexMatrix H = build_hamiltonian(p);

  SUBCASE("v^dag u = 1 and u maps the frame to an orthonormal set") {
    CHECK((hc.v.adjoint() * hc.u - ComplexMatrix::Identity(4, 4)).norm() < 1e-12);
    Eigenframe f = eigenframe(p);
    ComplexMatrix R(4, 4);
    R << f.E, f.G0, f.Gminus, f.Gplus;
    ComplexMatrix mapped = hc.u * R;
    CHECK((mapped.adjoint() * mapped - ComplexMatrix::Identity(4, 4)).norm() < 1e-10);
  }
  SUBCASE("h and h~ are Hermitian") {
    CHECK((hc.h - hc.h.adjoint()).norm() < 1e-10);
    CHECK((hc.h_tilde - hc.h_tilde.adjoint()).norm() < 1e-10);
  }
  SUBCASE("h is isospectral with H") {
    auto sh = biortho::biorthogonal_eig(hc.h);
    auto sH = biortho::biorthogonal_eig(H);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(sh.eigenvalues(i) - sH.eigenvalues(i)) < 1e-10);
  }
  SUBCASE("h matches the flat tripod coupling form") {
    // oracle: expand in the orthonormal images g^c = u G^c, e = u E
    Eigenframe f = eigenframe(p);
    ComplexVector e = hc.u * f.E, g0 = hc.u * f.G0, gm = hc.u * f.Gminus,
                  gp = hc.u * f.Gplus;
    ComplexMatrix h_claim = p.kappa0 * g0 * e.adjoint() +
                            p.kappa_plus * gp * e.adjoint() +
                            p.kappa_minus * gm * e.adjoint();
    h_claim += h_claim.adjoint().eval();
    CHECK((hc.h - h_claim).norm() < 1e-10);
  }
  SUBCASE("eta near identity makes h near H") {
    TripodParams mild{1e-3, 1.0, 1.0, 0.5, 0.25};
    auto hcm = hermitian_counterpart(mild);
    CHECK((hcm.h - build_hamiltonian(mild)).norm() < 1e-2);
  }
}
