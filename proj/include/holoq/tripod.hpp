#pragma once

#include "holoq/biortho.hpp"
#include "holoq/gaugeholo.hpp"
#include "holoq/types.hpp"

#include <array>

namespace holoq::tripod {

/// Gain/loss four-level system parameters.  Valid domain: 0 < alpha^2 < delta^2
/// (away from the exceptional point), couplings not all zero.
struct TripodParams {
  double alpha = 0.0;
  double delta = 0.0;
  Complex kappa0{};
  Complex kappa_plus{};
  Complex kappa_minus{};

  double omega() const;       // sqrt(delta^2 - alpha^2)
  double kappa_bar() const;   // sqrt(sum |kappa_c|^2), bright eigenvalue scale
  void validate() const;      // throws ParamDomain
};

/// Chart point for the first gate family: kappa0 = k cos(theta/2),
/// kappa+ = -k sin(theta/2) e^{i phi}, kappa- = 0.
struct U1Chart {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2pi)
  double kappa = 1.0;  // > 0
};

/// Chart point for the second gate family: kappa0 = k cos(theta),
/// kappa- = k sin(theta) cos(phi), kappa+ = k sin(theta) sin(phi).
struct U2Chart {
  double theta = 0.0;
  double phi = 0.0;
  double kappa = 1.0;
};

/// The eight basis 4-vectors of the analytic eigenframe (tilde = conjugate).
struct Eigenframe {
  ComplexVector E, G0, Gminus, Gplus;
  ComplexVector tE, tG0, tGminus, tGplus;
};

/// Dark/bright states of the U1 chart with their biorthogonal partners.
/// B labels follow the eigenvalue: H B_pm = +-kappa B_pm.
struct DarkBright {
  ComplexVector D1, D2, Bplus, Bminus;
  ComplexVector tD1, tD2, tBplus, tBminus;
};

struct DarkPair {
  ComplexVector D1, D2;
  ComplexVector tD1, tD2;
};

struct TripodGateReport {
  double beta = 0.0;              // geometric phase from the line integral
  ComplexMatrix gate;             // closed form in the dark basis
  ComplexMatrix numeric_holonomy; // end-to-end numeric pipeline
  double discrepancy = 0.0;       // |gate - numeric|_F
  double pseudo_unitarity_residual = 0.0;
};

/// H from the dyadic expansion over {|G^c>, |E>}; the authoritative builder.
ComplexMatrix build_hamiltonian(const TripodParams& p);

/// H = L - i*Gamma from the explicit Hermitian gain/loss pair; agrees with
/// build_hamiltonian to machine precision (standing self-test in the suite).
ComplexMatrix build_hamiltonian_gainloss(const TripodParams& p);

Eigenframe eigenframe(const TripodParams& p);

/// eta = |E~><E~| + sum_c |G~^c><G~^c|; independent of the chart point at
/// fixed alpha.
biortho::MetricOperator metric(const TripodParams& p);

std::array<Complex, 3> u1_chart_couplings(const U1Chart& c);  // (k0, k+, k-)
std::array<Complex, 3> u2_chart_couplings(const U2Chart& c);

/// Params whose Hamiltonian the chart states diagonalize (the U1 chart
/// couplings enter the dyadic builder conjugated).
TripodParams params_for_u1(const U1Chart& c, double alpha, double delta);
TripodParams params_for_u2(const U2Chart& c, double alpha, double delta);

DarkBright dark_bright_states_u1(const U1Chart& c, const TripodParams& p);
DarkPair dark_states_u2(const U2Chart& c, const TripodParams& p);

/// Hamiltonian family over the (theta, phi) chart, with constant metric
/// evaluator and the analytic dark frames as the smooth-frame provider.
gauge::HamiltonianFamily u1_family(double alpha, double delta, double kappa);
gauge::HamiltonianFamily u2_family(double alpha, double delta, double kappa);

/// Rectangle (0,0) -> (theta0,0) -> (theta0,phi_span) -> (0,phi_span) -> (0,0).
gauge::ParamLoop rectangle_loop(double theta0, double phi_span);

TripodGateReport gate_u1(const gauge::ParamLoop& loop, double alpha, double delta,
                         double kappa, int n_steps = 2000);
TripodGateReport gate_u2(const gauge::ParamLoop& loop, double alpha, double delta,
                         double kappa, int n_steps = 2000);

/// | [U1,U2] - sin(beta2)(1 - e^{i beta1}) sigma_x |_F for
/// U1 = diag(1, e^{i beta1}), U2 = exp(i beta2 sigma_y).
double commutator_check(double beta1, double beta2);

/// exp(i beta sigma_y) in the dark basis, sigma_y = [[0,-i],[i,0]]:
/// [[cos b, sin b], [-sin b, cos b]].
ComplexMatrix exp_i_beta_sigma_y(double beta);

struct HermitianCounterpart {
  ComplexMatrix u;        // eta^{1/2}; maps the eigenframe to an orthonormal set
  ComplexMatrix v;        // (u^dag)^{-1}, so v^dag u = 1
  ComplexMatrix h;        // u H v^dag, Hermitian, isospectral with H
  ComplexMatrix h_tilde;  // eta H, Hermitian in a non-orthogonal basis
};

HermitianCounterpart hermitian_counterpart(const TripodParams& p);

}  // namespace holoq::tripod
