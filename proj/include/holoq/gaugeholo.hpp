#pragma once

#include "holoq/biortho.hpp"
#include "holoq/types.hpp"

#include <functional>
#include <vector>

namespace holoq::gauge {

/// Point in the d-dimensional control chart.
using ParamPoint = Eigen::VectorXd;

/// Closed polyline in chart coordinates; if closed, first == last exactly.
struct ParamLoop {
  std::vector<ParamPoint> points;
  bool closed = true;

  void validate() const;
  double edge_length(std::size_t e) const;
  double total_length() const;
};

/// Selects a degeneracy block by nearest eigenvalue.
struct LevelSelector {
  Complex target{0.0, 0.0};
};

/// Smoothly paired right/left frames of one degeneracy block (N x n0 each,
/// left^dag * right = 1).
struct FramePair {
  ComplexMatrix right;
  ComplexMatrix left;
  Eigen::Index block_size() const { return right.cols(); }
};

/// Parameter-dependent Hamiltonian with optional analytic metric and frame
/// evaluators.  When metric is absent it is rebuilt from the left eigenframe
/// at each sampled point; when frame_provider is present it defines the gauge
/// section used for derivatives of the tracked block.
struct HamiltonianFamily {
  Eigen::Index dim = 0;
  int chart_dim = 0;
  std::function<ComplexMatrix(const ParamPoint&)> hamiltonian;
  std::function<biortho::MetricOperator(const ParamPoint&)> metric;  // optional
  std::function<FramePair(const ParamPoint&)> frame_provider;        // optional

  ComplexMatrix h_at(const ParamPoint& p) const;
  biortho::MetricOperator metric_at(const ParamPoint& p) const;
};

/// Matrix-valued connection components at one chart point.
struct GaugeFieldSample {
  ParamPoint point;
  std::vector<ComplexMatrix> components;  // d matrices, n0 x n0
};

/// Field sample at a segment midpoint together with the chart displacement.
struct SegmentSample {
  GaugeFieldSample field;
  ParamPoint delta;
};

struct HolonomyResult {
  ComplexMatrix matrix;  // n0 x n0, in the loop-base-point frame
  int steps = 0;
  double pseudo_unitarity_residual = 0.0;
  std::vector<ComplexMatrix> segment_log;  // per-segment exponents i*sum A du
  int reanchor_count = 0;
};

struct HolonomyOptions {
  enum class Integrator { Magnus4, Midpoint };
  Integrator integrator = Integrator::Magnus4;
  double fd_step = 1e-5;            // chart-scale finite-difference step
  double reanchor_threshold = 0.5;  // re-seed gauge anchor below this smin
  double gap_tol = 1e-6;            // spectral gap guard
  bool keep_segment_log = false;
};

/// Smooth single-valued gauge section w.r.t. an anchor frame:
///   V(p) = P(p) W S^{-1/2},  L(p) = P(p)^dag W~ (S^{-1/2})^dag,
///   S = W~^dag P(p) W,
/// with P(p) the oblique spectral projector of the tracked block.  Reduces to
/// Loewdin symmetric orthonormalization for eta = 1 and agrees with the anchor
/// at its own point.  Throws PairingAmbiguity when the anchored subspace has
/// rotated too far (smin < hard floor) and GapClosure when the block gap
/// drops below tol.
FramePair section_frames(const HamiltonianFamily& family, const ParamPoint& p,
                         const FramePair& anchor, const LevelSelector& level,
                         double gap_tol, double* smin_out = nullptr);

/// Smooth frames along an ordered path.  With a frame_provider the provider is
/// the section; otherwise a projector-section gauge anchored at the first
/// point, with seamless re-anchoring when conditioning degrades.
std::vector<FramePair> smooth_frame_along_path(const HamiltonianFamily& family,
                                               const std::vector<ParamPoint>& path,
                                               const LevelSelector& level,
                                               double gap_tol = 1e-6);

/// K_mu = -eta^{-1} d_mu eta / 2 by central difference; Richardson check with
/// h/2 guards the step size.
ComplexMatrix kinetic_connection(const HamiltonianFamily& family, const ParamPoint& p,
                                 int mu, double h);

/// One connection component from a smoothed stencil:
///   A_mu = i L0^dag [ (V+ - V-)/(2h) - K_mu V0 ].
ComplexMatrix gauge_field_component(const FramePair& minus, const FramePair& center,
                                    const FramePair& plus, const ComplexMatrix& K_mu,
                                    double h);

/// All d components at a point; stencil frames from the family's section.
GaugeFieldSample gauge_field(const HamiltonianFamily& family, const ParamPoint& p,
                             const LevelSelector& level, double h = 1e-5,
                             double gap_tol = 1e-6);

/// max_{a,b,mu} | (i A_mu^{ba})^* + i A~_mu^{ab} | with the tilde field built
/// from the role-swapped frames (metric eta^{-1}).
double antihermiticity_residual(const HamiltonianFamily& family, const ParamPoint& p,
                                const LevelSelector& level, double h = 1e-5);

/// A'_mu = U^{-1} A_mu U + i U^{-1} d_mu U, with d_mu U by central difference.
/// U_family must be pseudo-unitary under eta_small at every sample point.
std::vector<GaugeFieldSample> gauge_transform(
    const std::vector<GaugeFieldSample>& samples,
    const std::function<ComplexMatrix(const ParamPoint&)>& u_family, double h,
    const biortho::MetricOperator& eta_small);

/// Ordered product Prod_k exp(i sum_mu A_mu(mid_k) delta_k^mu), later segments
/// multiplied on the left.  eta_small is the base-point metric restricted to
/// the block (for the residual report).
HolonomyResult path_ordered_exponential(const std::vector<SegmentSample>& samples,
                                        const biortho::MetricOperator& eta_small);

/// Full pipeline: section gauge along the loop, per-segment integration,
/// gauge-closure correction, result in the base-point frame.
HolonomyResult holonomy_of_loop(const HamiltonianFamily& family, const ParamLoop& loop,
                                const LevelSelector& level, int n_steps,
                                const HolonomyOptions& opts = {});

/// exp(-i integral_0^T E0(t) dt), trapezoidal rule.
Complex dynamical_phase(const std::function<double(double)>& E0, double T, int n_steps);

/// Metric restricted to a block frame: (eta_D)_ab = <W_a| eta |W_b>.
biortho::MetricOperator restricted_metric(const biortho::MetricOperator& eta,
                                          const ComplexMatrix& frame);

}  // namespace holoq::gauge
