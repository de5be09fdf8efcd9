#pragma once

#include "holoq/biortho.hpp"
#include "holoq/gaugeholo.hpp"
#include "holoq/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace holoq::dynamics {

/// i d/dt psi = Lambda(t) psi with Lambda = H + iK, K = -eta^{-1} eta_dot / 2.
/// metric_time_dependent = false short-circuits K = 0 (constant eta).
struct TimeDependentSystem {
  Eigen::Index dim = 0;
  double duration = 0.0;
  std::function<ComplexMatrix(double)> hamiltonian;
  std::function<biortho::MetricOperator(double)> metric;
  bool metric_time_dependent = true;

  ComplexMatrix h_at(double t) const { return hamiltonian(t); }
  biortho::MetricOperator metric_at(double t) const { return metric(t); }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexVector> states;
  std::vector<double> eta_norms;  // <psi| eta(t) |psi>
};

enum class GeneratorKind {
  Full,             // Lambda = H + iK
  BareHamiltonian,  // H only; violates eta-norm conservation when eta varies
};

/// Lambda(t) = H(t) - i eta^{-1}(t) [eta(t+h) - eta(t-h)] / (4h).
ComplexMatrix time_generator(const TimeDependentSystem& system, double t, double h);

/// Classical fixed-step 4th-order integration of the generalized Schrodinger
/// equation; trajectory recorded every record_stride steps (and at t = T).
Trajectory evolve(const TimeDependentSystem& system, const ComplexVector& psi0,
                  int n_steps, GeneratorKind kind = GeneratorKind::Full,
                  double fd_step = 1e-6, int record_stride = 1);

/// max_k |<psi_k|eta_k|psi_k> - <psi_0|eta_0|psi_0>| / |<psi_0|eta_0|psi_0>|.
double norm_conservation_drift(const Trajectory& traj);

/// | i (eta(t+h)-eta(t-h))/(2h) - (Lambda^dag eta - eta Lambda) | / |eta|.
double metric_ode_residual(const TimeDependentSystem& system, double t, double h);

/// Coefficients of psi in the dark frame: c_a = <D~^a|psi>.
ComplexVector dark_coefficients(const ComplexVector& psi, const ComplexMatrix& dark_left);

/// Relative eta-weight of psi outside the dark block.
double excited_population(const ComplexVector& psi, const ComplexMatrix& dark_right,
                          const ComplexMatrix& dark_left,
                          const biortho::MetricOperator& eta);

/// Gate G with c(T) = G c(0), assembled from n0 trajectories whose initial
/// states are the dark basis columns.  Final leakage above error_threshold
/// throws ExcessLeakage; the worst value is reported through max_leakage.
/// Convergence studies that deliberately start non-adiabatic may raise the
/// threshold.
ComplexMatrix adiabatic_gate_extract(std::span<const Trajectory> trajectories,
                                     const ComplexMatrix& dark_right,
                                     const ComplexMatrix& dark_left,
                                     const biortho::MetricOperator& eta,
                                     double* max_leakage = nullptr,
                                     double error_threshold = 1e-1);

/// Chart position along a polyline loop: each edge gets time proportional to
/// its length and is traversed with a smoothstep ramp (zero velocity at the
/// vertices, suppressing non-adiabatic corner kicks).
gauge::ParamPoint loop_position(const gauge::ParamLoop& loop, double fraction);

/// Time-dependent system traversing the loop in total time T.
TimeDependentSystem system_from_loop(const gauge::HamiltonianFamily& family,
                                     const gauge::ParamLoop& loop, double T);

}  // namespace holoq::dynamics
