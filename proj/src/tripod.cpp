#include "holoq/tripod.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace holoq::tripod {

namespace {

const Complex kI(0.0, 1.0);

ComplexMatrix dyad(const ComplexVector& ket, const ComplexVector& bra_tilde_of) {
  // |ket><X~| with <X~| = X^T (tilde states are entrywise conjugates)
  return ket * bra_tilde_of.transpose();
}

double simpson01(const std::function<double(double)>& f, int panels) {
  double s = f(0.0) + f(1.0);
  for (int k = 1; k < panels; ++k) s += 2.0 * (1 + k % 2) * f(double(k) / panels);
  return s / (3.0 * panels);
}

// line integral of g(theta) dphi along a polyline loop
double line_integral_dphi(const gauge::ParamLoop& loop,
                          const std::function<double(double)>& g) {
  double total = 0.0;
  for (std::size_t e = 0; e + 1 < loop.points.size(); ++e) {
    const double th_a = loop.points[e](0), th_b = loop.points[e + 1](0);
    const double dphi = loop.points[e + 1](1) - loop.points[e](1);
    if (dphi == 0.0) continue;
    total += dphi * simpson01([&](double u) { return g(th_a + u * (th_b - th_a)); }, 256);
  }
  return total;
}

}  // namespace

double TripodParams::omega() const { return std::sqrt(delta * delta - alpha * alpha); }

double TripodParams::kappa_bar() const {
  return std::sqrt(std::norm(kappa0) + std::norm(kappa_plus) + std::norm(kappa_minus));
}

void TripodParams::validate() const {
  const double r = std::abs(alpha) / std::abs(delta);
  if (!(alpha * alpha > 0.0) || !(alpha * alpha < delta * delta))
    throw ParamDomain("TripodParams: need 0 < alpha^2 < delta^2");
  // normalizations N1, N2 diverge toward the exceptional point and the
  // Hermitian limit; double precision conditioning bounds
  if (r > 0.999 || r < 1e-6)
    throw ParamDomain("TripodParams: alpha/delta outside (1e-6, 0.999)");
  if (kappa_bar() == 0.0) throw ParamDomain("TripodParams: all couplings zero");
}

Eigenframe eigenframe(const TripodParams& p) {
  p.validate();
  const double W = p.omega(), D = p.delta, a = p.alpha;
  const Complex N1 = 1.0 / std::sqrt(2.0 * W * (D - W));
  const Complex N2 = kI / std::sqrt(2.0 * W * (D + W));
  Eigenframe f;
  f.E = ComplexVector(4);
  f.G0 = ComplexVector(4);
  f.Gminus = ComplexVector(4);
  f.Gplus = ComplexVector(4);
  f.E << N1 * kI * (W - D), 0, N1 * a, 0;
  f.G0 << 0, N1 * kI * (W - D), 0, N1 * a;
  f.Gminus << -N2 * kI * (W + D), 0, N2 * a, 0;
  f.Gplus << 0, -N2 * kI * (W + D), 0, N2 * a;
  f.tE = f.E.conjugate();
  f.tG0 = f.G0.conjugate();
  f.tGminus = f.Gminus.conjugate();
  f.tGplus = f.Gplus.conjugate();
  return f;
}

ComplexMatrix build_hamiltonian(const TripodParams& p) {
  Eigenframe f = eigenframe(p);
  ComplexMatrix H = p.kappa0 * dyad(f.G0, f.E) + p.kappa_plus * dyad(f.Gplus, f.E) +
                    p.kappa_minus * dyad(f.Gminus, f.E);
  H += std::conj(p.kappa0) * dyad(f.E, f.G0) +
       std::conj(p.kappa_plus) * dyad(f.E, f.Gplus) +
       std::conj(p.kappa_minus) * dyad(f.E, f.Gminus);
  return H;
}

ComplexMatrix build_hamiltonian_gainloss(const TripodParams& p) {
  p.validate();
  const double W = p.omega(), D = p.delta, a = p.alpha;
  const Complex k0 = p.kappa0, kp = p.kappa_plus, km = p.kappa_minus;
  const Complex k0c = std::conj(k0), kpc = std::conj(kp), kmc = std::conj(km);
  ComplexMatrix L(4, 4), G(4, 4);
  L << 0.0, (W - D) * k0c, (D + W) * km + (D - W) * kmc, (D - W) * kpc,
      (W - D) * k0, 0.0, (D + W) * kp, 0.0,
      (D + W) * kmc + (D - W) * km, (D + W) * kpc, 0.0, a * a * k0c / (D - W),
      (D - W) * kp, 0.0, a * a * k0 / (D - W), 0.0;
  L /= 2.0 * W;
  const Complex gdiag = km + kmc;  // 2 Re(kappa_minus)
  G << gdiag, kpc, 0.0, k0c,
      kp, 0.0, k0, 0.0,
      0.0, k0c, -gdiag, -kpc,
      k0, 0.0, -kp, 0.0;
  G *= a / (2.0 * W);
  return L - kI * G;
}

biortho::MetricOperator metric(const TripodParams& p) {
  Eigenframe f = eigenframe(p);
  ComplexMatrix eta = f.tE * f.tE.adjoint() + f.tG0 * f.tG0.adjoint() +
                      f.tGminus * f.tGminus.adjoint() + f.tGplus * f.tGplus.adjoint();
  return biortho::MetricOperator::from_matrix(eta);
}

std::array<Complex, 3> u1_chart_couplings(const U1Chart& c) {
  return {c.kappa * std::cos(c.theta / 2.0),
          -c.kappa * std::sin(c.theta / 2.0) * std::exp(kI * c.phi), Complex(0.0)};
}

std::array<Complex, 3> u2_chart_couplings(const U2Chart& c) {
  return {Complex(c.kappa * std::cos(c.theta)),
          Complex(c.kappa * std::sin(c.theta) * std::sin(c.phi)),
          Complex(c.kappa * std::sin(c.theta) * std::cos(c.phi))};
}

TripodParams params_for_u1(const U1Chart& c, double alpha, double delta) {
  if (c.kappa <= 0.0) throw ParamDomain("U1Chart: kappa must be positive");
  auto [k0, kp, km] = u1_chart_couplings(c);
  // conjugated: the chart couplings multiply |E><G~^c| in the dyadic builder,
  // which is what makes the chart's dark states dark
  return TripodParams{alpha, delta, std::conj(k0), std::conj(kp), std::conj(km)};
}

TripodParams params_for_u2(const U2Chart& c, double alpha, double delta) {
  if (c.kappa <= 0.0) throw ParamDomain("U2Chart: kappa must be positive");
  auto [k0, kp, km] = u2_chart_couplings(c);
  return TripodParams{alpha, delta, k0, kp, km};  // real couplings
}

DarkBright dark_bright_states_u1(const U1Chart& c, const TripodParams& p) {
  Eigenframe f = eigenframe(p);
  const double ct = std::cos(c.theta / 2.0), st = std::sin(c.theta / 2.0);
  const Complex eip = std::exp(kI * c.phi);
  DarkBright s;
  s.D1 = f.Gminus;
  s.D2 = ct * f.Gplus + st * eip * f.G0;
  // B labels follow the eigenvalue; the sign in front of e^{i phi}|E> flips
  // relative to the label
  s.Bplus = (st * f.Gplus - eip * ct * f.G0 - eip * f.E) / std::sqrt(2.0);
  s.Bminus = (st * f.Gplus - eip * ct * f.G0 + eip * f.E) / std::sqrt(2.0);
  // biorthogonal partners carry the same coefficients over the tilde frame
  // (the coefficient matrix is unitary)
  s.tD1 = f.tGminus;
  s.tD2 = ct * f.tGplus + st * eip * f.tG0;
  s.tBplus = (st * f.tGplus - eip * ct * f.tG0 - eip * f.tE) / std::sqrt(2.0);
  s.tBminus = (st * f.tGplus - eip * ct * f.tG0 + eip * f.tE) / std::sqrt(2.0);
  return s;
}

DarkPair dark_states_u2(const U2Chart& c, const TripodParams& p) {
  Eigenframe f = eigenframe(p);
  const double ct = std::cos(c.theta), st = std::sin(c.theta);
  const double cp = std::cos(c.phi), sp = std::sin(c.phi);
  DarkPair s;
  s.D1 = ct * (cp * f.Gminus + sp * f.Gplus) - st * f.G0;
  s.D2 = cp * f.Gplus - sp * f.Gminus;
  s.tD1 = ct * (cp * f.tGminus + sp * f.tGplus) - st * f.tG0;
  s.tD2 = cp * f.tGplus - sp * f.tGminus;
  return s;
}

namespace {

gauge::HamiltonianFamily chart_family(
    double alpha, double delta, double kappa, bool u1) {
  gauge::HamiltonianFamily fam;
  fam.dim = 4;
  fam.chart_dim = 2;
  biortho::MetricOperator eta = [&] {
    U1Chart probe{0.3, 0.0, kappa};
    return metric(params_for_u1(probe, alpha, delta));  // chart-independent
  }();
  fam.metric = [eta](const gauge::ParamPoint&) { return eta; };
  if (u1) {
    fam.hamiltonian = [alpha, delta, kappa](const gauge::ParamPoint& p) {
      return build_hamiltonian(params_for_u1({p(0), p(1), kappa}, alpha, delta));
    };
    fam.frame_provider = [alpha, delta, kappa](const gauge::ParamPoint& p) {
      U1Chart c{p(0), p(1), kappa};
      DarkBright s = dark_bright_states_u1(c, params_for_u1(c, alpha, delta));
      gauge::FramePair fp;
      fp.right = ComplexMatrix(4, 2);
      fp.left = ComplexMatrix(4, 2);
      fp.right << s.D1, s.D2;
      fp.left << s.tD1, s.tD2;
      return fp;
    };
  } else {
    fam.hamiltonian = [alpha, delta, kappa](const gauge::ParamPoint& p) {
      return build_hamiltonian(params_for_u2({p(0), p(1), kappa}, alpha, delta));
    };
    fam.frame_provider = [alpha, delta, kappa](const gauge::ParamPoint& p) {
      U2Chart c{p(0), p(1), kappa};
      DarkPair s = dark_states_u2(c, params_for_u2(c, alpha, delta));
      gauge::FramePair fp;
      fp.right = ComplexMatrix(4, 2);
      fp.left = ComplexMatrix(4, 2);
      fp.right << s.D1, s.D2;
      fp.left << s.tD1, s.tD2;
      return fp;
    };
  }
  return fam;
}

}  // namespace

gauge::HamiltonianFamily u1_family(double alpha, double delta, double kappa) {
  return chart_family(alpha, delta, kappa, true);
}

gauge::HamiltonianFamily u2_family(double alpha, double delta, double kappa) {
  return chart_family(alpha, delta, kappa, false);
}

gauge::ParamLoop rectangle_loop(double theta0, double phi_span) {
  gauge::ParamLoop loop;
  auto pt = [](double t, double p) {
    gauge::ParamPoint q(2);
    q << t, p;
    return q;
  };
  loop.points = {pt(0, 0), pt(theta0, 0), pt(theta0, phi_span), pt(0, phi_span),
                 pt(0, 0)};
  loop.closed = true;
  return loop;
}

ComplexMatrix exp_i_beta_sigma_y(double beta) {
  ComplexMatrix g(2, 2);
  g << std::cos(beta), std::sin(beta), -std::sin(beta), std::cos(beta);
  return g;
}

namespace {

TripodGateReport gate_report(const gauge::ParamLoop& loop, double alpha, double delta,
                             double kappa, int n_steps, bool u1) {
  loop.validate();
  gauge::HamiltonianFamily fam = u1 ? u1_family(alpha, delta, kappa)
                                    : u2_family(alpha, delta, kappa);
  TripodGateReport rep;
  if (u1) {
    // only surviving component: (A_phi)^{22} = -sin^2(theta/2)
    rep.beta = line_integral_dphi(
        loop, [](double th) { return -std::pow(std::sin(th / 2.0), 2); });
    rep.gate = ComplexMatrix::Identity(2, 2);
    rep.gate(1, 1) = std::exp(kI * rep.beta);
  } else {
    // A_phi = cos(theta) sigma_y
    rep.beta = line_integral_dphi(loop, [](double th) { return std::cos(th); });
    rep.gate = exp_i_beta_sigma_y(rep.beta);
  }
  // numeric holonomy runs the eigensolver pipeline, not the analytic frames
  gauge::HamiltonianFamily numeric = fam;
  auto anchor = fam.frame_provider;
  numeric.frame_provider = nullptr;
  gauge::HolonomyOptions opts;
  auto hol = gauge::holonomy_of_loop(numeric, loop, gauge::LevelSelector{0.0}, n_steps,
                                     opts);
  // rotate the numeric result into the analytic dark basis at the base point
  gauge::FramePair base_analytic = anchor(loop.points.front());
  gauge::FramePair base_numeric =
      gauge::smooth_frame_along_path(numeric, {loop.points.front()},
                                     gauge::LevelSelector{0.0})
          .front();
  ComplexMatrix T = base_analytic.left.adjoint() * base_numeric.right;
  rep.numeric_holonomy = T * hol.matrix * T.inverse();
  rep.pseudo_unitarity_residual = hol.pseudo_unitarity_residual;
  rep.discrepancy = (rep.gate - rep.numeric_holonomy).norm();
  return rep;
}

}  // namespace

TripodGateReport gate_u1(const gauge::ParamLoop& loop, double alpha, double delta,
                         double kappa, int n_steps) {
  return gate_report(loop, alpha, delta, kappa, n_steps, true);
}

TripodGateReport gate_u2(const gauge::ParamLoop& loop, double alpha, double delta,
                         double kappa, int n_steps) {
  return gate_report(loop, alpha, delta, kappa, n_steps, false);
}

double commutator_check(double beta1, double beta2) {
  ComplexMatrix u1 = ComplexMatrix::Identity(2, 2);
  u1(1, 1) = std::exp(kI * beta1);
  ComplexMatrix u2 = exp_i_beta_sigma_y(beta2);
  ComplexMatrix comm = u1 * u2 - u2 * u1;
  ComplexMatrix sx(2, 2);
  sx << 0, 1, 1, 0;
  ComplexMatrix expected = std::sin(beta2) * (1.0 - std::exp(kI * beta1)) * sx;
  return (comm - expected).norm();
}

HermitianCounterpart hermitian_counterpart(const TripodParams& p) {
  ComplexMatrix H = build_hamiltonian(p);
  biortho::MetricOperator eta = metric(p);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(eta.matrix);
  HermitianCounterpart hc;
  hc.u = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();  // principal eta^{1/2}
  ComplexMatrix u_inv = es.eigenvectors() *
                        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                        es.eigenvectors().adjoint();
  hc.v = u_inv;  // u Hermitian, so (u^dag)^{-1} = u^{-1}
  hc.h = hc.u * H * hc.v.adjoint();
  hc.h_tilde = eta.matrix * H;
  return hc;
}

}  // namespace holoq::tripod
