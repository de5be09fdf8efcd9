#include "holoq/dynamics.hpp"

#include <cmath>

namespace holoq::dynamics {

ComplexMatrix time_generator(const TimeDependentSystem& system, double t, double h) {
  ComplexMatrix H = system.h_at(t);
  if (!system.metric_time_dependent) return H;
  if (t - h < 0.0 || t + h > system.duration)
    throw ParamDomain("time_generator: stencil leaves [0, T]");
  auto deriv = [&](double step) {
    return ((system.metric_at(t + step).matrix - system.metric_at(t - step).matrix) /
            (2.0 * step))
        .eval();
  };
  ComplexMatrix eta_inv = system.metric_at(t).inverse;
  ComplexMatrix K = -0.5 * eta_inv * deriv(h);
  ComplexMatrix K_half = -0.5 * eta_inv * deriv(0.5 * h);
  if ((K - K_half).norm() > 4e-6 * std::max(1.0, K.norm()) + 1e-6)
    throw StepTooLarge("time_generator: Richardson mismatch in eta derivative");
  return H + Complex(0, 1) * K;
}

Trajectory evolve(const TimeDependentSystem& system, const ComplexVector& psi0,
                  int n_steps, GeneratorKind kind, double fd_step, int record_stride) {
  require_same_dim(psi0.size(), system.dim, "evolve");
  if (n_steps < 1) throw ParamDomain("evolve: n_steps must be >= 1");
  if (record_stride < 1) record_stride = 1;

  const double dt = system.duration / n_steps;
  auto generator = [&](double t) -> ComplexMatrix {
    // clamp the FD stencil inside [0, T] by nudging the endpoint evaluations
    double tc = std::min(std::max(t, fd_step), system.duration - fd_step);
    if (kind == GeneratorKind::BareHamiltonian || !system.metric_time_dependent)
      return system.h_at(t);
    return time_generator(system, tc, fd_step);
  };

  biortho::MetricOperator eta0 = system.metric_at(0.0);
  Trajectory traj;
  traj.times.reserve(n_steps / record_stride + 2);
  ComplexVector psi = psi0;
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(psi);
    const biortho::MetricOperator& eta =
        system.metric_time_dependent ? system.metric_at(t) : eta0;
    traj.eta_norms.push_back(std::real(biortho::eta_inner(eta, psi, psi)));
  };
  record(0.0);

  for (int k = 0; k < n_steps; ++k) {
    const double t = k * dt;
    ComplexMatrix L1 = generator(t);
    ComplexMatrix L2 = generator(t + 0.5 * dt);
    ComplexMatrix L4 = generator(t + dt);
    ComplexVector k1 = Complex(0, -1) * (L1 * psi);
    ComplexVector k2 = Complex(0, -1) * (L2 * (psi + 0.5 * dt * k1));
    ComplexVector k3 = Complex(0, -1) * (L2 * (psi + 0.5 * dt * k2));
    ComplexVector k4 = Complex(0, -1) * (L4 * (psi + dt * k3));
    psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!psi.allFinite()) throw NonFiniteState("evolve: state blew up at t = " +
                                               std::to_string(t + dt));
    if ((k + 1) % record_stride == 0 || k + 1 == n_steps) record((k + 1) * dt);
  }
  return traj;
}

double norm_conservation_drift(const Trajectory& traj) {
  if (traj.eta_norms.empty()) throw ParamDomain("norm_conservation_drift: empty");
  const double n0 = traj.eta_norms.front();
  double worst = 0.0;
  for (double nk : traj.eta_norms) worst = std::max(worst, std::abs(nk - n0));
  return worst / std::abs(n0);
}

double metric_ode_residual(const TimeDependentSystem& system, double t, double h) {
  if (t - h < 0.0 || t + h > system.duration)
    throw ParamDomain("metric_ode_residual: stencil leaves [0, T]");
  ComplexMatrix eta = system.metric_at(t).matrix;
  ComplexMatrix eta_dot =
      (system.metric_at(t + h).matrix - system.metric_at(t - h).matrix) / (2.0 * h);
  ComplexMatrix lambda = system.metric_time_dependent
                             ? time_generator(system, t, h)
                             : system.h_at(t);
  ComplexMatrix lhs = Complex(0, 1) * eta_dot;
  ComplexMatrix rhs = lambda.adjoint() * eta - eta * lambda;
  return relative_residual(lhs - rhs, eta);
}

ComplexVector dark_coefficients(const ComplexVector& psi,
                                const ComplexMatrix& dark_left) {
  require_same_dim(psi.size(), dark_left.rows(), "dark_coefficients");
  return dark_left.adjoint() * psi;
}

double excited_population(const ComplexVector& psi, const ComplexMatrix& dark_right,
                          const ComplexMatrix& dark_left,
                          const biortho::MetricOperator& eta) {
  ComplexVector inside = dark_right * (dark_left.adjoint() * psi);
  ComplexVector outside = psi - inside;
  double total = std::real(biortho::eta_inner(eta, psi, psi));
  double out = std::real(biortho::eta_inner(eta, outside, outside));
  return total > 0.0 ? out / total : out;
}

ComplexMatrix adiabatic_gate_extract(std::span<const Trajectory> trajectories,
                                     const ComplexMatrix& dark_right,
                                     const ComplexMatrix& dark_left,
                                     const biortho::MetricOperator& eta,
                                     double* max_leakage, double error_threshold) {
  const Eigen::Index n0 = dark_right.cols();
  if (Eigen::Index(trajectories.size()) != n0)
    throw DimensionMismatch("adiabatic_gate_extract: need one trajectory per dark basis column");
  ComplexMatrix G(n0, n0);
  double worst = 0.0;
  for (Eigen::Index a = 0; a < n0; ++a) {
    const Trajectory& tr = trajectories[a];
    if (tr.states.empty()) throw ParamDomain("adiabatic_gate_extract: empty trajectory");
    double leak0 = excited_population(tr.states.front(), dark_right, dark_left, eta);
    if (leak0 > 1e-6)
      throw ExcessLeakage("adiabatic_gate_extract: initial state not in the dark subspace");
    double leakT = excited_population(tr.states.back(), dark_right, dark_left, eta);
    worst = std::max(worst, leakT);
    if (leakT > error_threshold)
      throw ExcessLeakage("adiabatic_gate_extract: final excited population " +
                          std::to_string(leakT) + " - evolution not adiabatic");
    G.col(a) = dark_coefficients(tr.states.back(), dark_left);
  }
  if (max_leakage) *max_leakage = worst;
  return G;
}

gauge::ParamPoint loop_position(const gauge::ParamLoop& loop, double fraction) {
  const double u = std::min(1.0, std::max(0.0, fraction));
  const double Ltot = loop.total_length();
  if (Ltot == 0.0) return loop.points.front();
  double acc = 0.0;
  for (std::size_t e = 0; e + 1 < loop.points.size(); ++e) {
    double fe = loop.edge_length(e) / Ltot;
    if (fe == 0.0) continue;
    if (u <= acc + fe || e + 2 == loop.points.size()) {
      double ue = std::min(1.0, std::max(0.0, (u - acc) / fe));
      double w = ue * ue * (3.0 - 2.0 * ue);  // smoothstep: zero endpoint velocity
      return loop.points[e] + w * (loop.points[e + 1] - loop.points[e]);
    }
    acc += fe;
  }
  return loop.points.back();
}

TimeDependentSystem system_from_loop(const gauge::HamiltonianFamily& family,
                                     const gauge::ParamLoop& loop, double T) {
  loop.validate();
  if (T <= 0.0) throw ParamDomain("system_from_loop: T must be positive");
  TimeDependentSystem sys;
  sys.dim = family.dim;
  sys.duration = T;
  sys.hamiltonian = [family, loop, T](double t) {
    return family.h_at(loop_position(loop, t / T));
  };
  sys.metric = [family, loop, T](double t) {
    return family.metric_at(loop_position(loop, t / T));
  };
  // chart-constant metric (alpha fixed) => K = 0 along the whole schedule
  ComplexMatrix e0 = family.metric_at(loop.points.front()).matrix;
  ComplexMatrix e1 = family.metric_at(loop_position(loop, 0.37)).matrix;
  sys.metric_time_dependent = relative_residual(e1 - e0, e0) > 1e-13;
  return sys;
}

}  // namespace holoq::dynamics
