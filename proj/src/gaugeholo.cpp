#include "holoq/gaugeholo.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace holoq::gauge {

namespace {

constexpr double kSminFloor = 0.05;  // below this the anchored section is lost

ParamPoint shifted(const ParamPoint& p, int mu, double h) {
  ParamPoint q = p;
  q(mu) += h;
  return q;
}

// Principal inverse square root.  S is Hermitian PSD when the anchor tilde
// frame is the metric partner of the anchor frame; with a drifting metric it
// may pick up a small non-Hermitian part, so use the general branch then.
ComplexMatrix inv_sqrt(const ComplexMatrix& S) {
  double herm = relative_residual(S - S.adjoint(), S);
  if (herm < 1e-10) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (S + S.adjoint()));
    return es.eigenvectors() *
           es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().adjoint();
  }
  ComplexMatrix root = S.sqrt();
  return root.inverse();
}

}  // namespace

void ParamLoop::validate() const {
  if (points.size() < 3) throw LoopNotClosed("ParamLoop: needs at least 3 points");
  const Eigen::Index d = points.front().size();
  for (const auto& p : points)
    require_same_dim(p.size(), d, "ParamLoop point");
  if (closed && points.front() != points.back())
    throw LoopNotClosed("ParamLoop: closed loop must end at its first point");
}

double ParamLoop::edge_length(std::size_t e) const {
  return (points.at(e + 1) - points.at(e)).norm();
}

double ParamLoop::total_length() const {
  double L = 0.0;
  for (std::size_t e = 0; e + 1 < points.size(); ++e) L += edge_length(e);
  return L;
}

ComplexMatrix HamiltonianFamily::h_at(const ParamPoint& p) const {
  ComplexMatrix H = hamiltonian(p);
  require_same_dim(H.rows(), dim, "HamiltonianFamily");
  require_square(H, "HamiltonianFamily");
  return H;
}

biortho::MetricOperator HamiltonianFamily::metric_at(const ParamPoint& p) const {
  if (metric) return metric(p);
  return biortho::metric_from_left(biortho::biorthogonal_eig(h_at(p)));
}

FramePair section_frames(const HamiltonianFamily& family, const ParamPoint& p,
                         const FramePair& anchor, const LevelSelector& level,
                         double gap_tol, double* smin_out) {
  auto sub = biortho::block_subspaces(family.h_at(p), level.target);
  if (sub.size != anchor.block_size())
    throw GapClosure("section_frames: block size changed along path");
  if (sub.gap <= gap_tol)
    throw GapClosure("section_frames: spectral gap " + std::to_string(sub.gap) +
                     " below tolerance");
  ComplexMatrix P = biortho::spectral_projector(sub);
  ComplexMatrix S = anchor.left.adjoint() * P * anchor.right;
  Eigen::JacobiSVD<ComplexMatrix> svd(S);
  double smin = svd.singularValues().minCoeff();
  if (smin_out) *smin_out = smin;
  if (smin < kSminFloor)
    throw PairingAmbiguity("section_frames: anchored subspace lost (smin = " +
                           std::to_string(smin) + ")");
  ComplexMatrix sinv_half = inv_sqrt(S);
  FramePair out;
  out.right = P * anchor.right * sinv_half;
  out.left = P.adjoint() * anchor.left * sinv_half.adjoint();
  return out;
}

namespace {

// Deterministic biorthonormal frame of the selected block from scratch.
FramePair seed_frame(const HamiltonianFamily& family, const ParamPoint& p,
                     const LevelSelector& level, double gap_tol) {
  auto sub = biortho::block_subspaces(family.h_at(p), level.target);
  if (sub.gap <= gap_tol)
    throw GapClosure("seed_frame: spectral gap below tolerance");
  ComplexMatrix Rb = sub.right;
  for (Eigen::Index c = 0; c < Rb.cols(); ++c) {
    Eigen::Index imax = 0;
    Rb.col(c).cwiseAbs().maxCoeff(&imax);
    Complex z = Rb.col(c)(imax);
    if (std::abs(z) > 0) Rb.col(c) *= std::conj(z) / std::abs(z);
  }
  ComplexMatrix S = sub.left.adjoint() * Rb;
  FramePair f;
  f.right = Rb * S.inverse();
  f.left = sub.left;
  return f;
}

FramePair frame_at(const HamiltonianFamily& family, const ParamPoint& p,
                   const FramePair& anchor, const LevelSelector& level,
                   double gap_tol, double* smin_out = nullptr) {
  if (family.frame_provider) {
    if (smin_out) *smin_out = 1.0;
    return family.frame_provider(p);
  }
  return section_frames(family, p, anchor, level, gap_tol, smin_out);
}

}  // namespace

std::vector<FramePair> smooth_frame_along_path(const HamiltonianFamily& family,
                                               const std::vector<ParamPoint>& path,
                                               const LevelSelector& level,
                                               double gap_tol) {
  std::vector<FramePair> out;
  out.reserve(path.size());
  if (path.empty()) return out;

  if (family.frame_provider) {
    for (const auto& p : path) out.push_back(family.frame_provider(p));
    return out;
  }

  FramePair anchor = seed_frame(family, path.front(), level, gap_tol);
  out.push_back(anchor);
  for (std::size_t k = 1; k < path.size(); ++k) {
    double smin = 1.0;
    FramePair f = section_frames(family, path[k], anchor, level, gap_tol, &smin);
    if (smin < 0.5) anchor = f;  // seamless: section w.r.t. itself is itself
    out.push_back(std::move(f));
  }
  return out;
}

ComplexMatrix kinetic_connection(const HamiltonianFamily& family, const ParamPoint& p,
                                 int mu, double h) {
  if (h <= 0.0) throw ParamDomain("kinetic_connection: h must be positive");
  auto deriv = [&](double step) {
    ComplexMatrix ep = family.metric_at(shifted(p, mu, step)).matrix;
    ComplexMatrix em = family.metric_at(shifted(p, mu, -step)).matrix;
    return ((ep - em) / (2.0 * step)).eval();
  };
  ComplexMatrix eta_inv = family.metric_at(p).inverse;
  ComplexMatrix K = -0.5 * eta_inv * deriv(h);
  ComplexMatrix K_half = -0.5 * eta_inv * deriv(0.5 * h);
  // Richardson: for a 2nd-order stencil the h and h/2 results must agree
  double mismatch = (K - K_half).norm();
  if (mismatch > 1e-6 * std::max(1.0, K.norm()) * 4.0 + 1e-6)
    throw StepTooLarge("kinetic_connection: Richardson mismatch " +
                       std::to_string(mismatch));
  return K;
}

ComplexMatrix gauge_field_component(const FramePair& minus, const FramePair& center,
                                    const FramePair& plus, const ComplexMatrix& K_mu,
                                    double h) {
  ComplexMatrix dV = (plus.right - minus.right) / (2.0 * h);
  return Complex(0, 1) * (center.left.adjoint() * (dV - K_mu * center.right));
}

GaugeFieldSample gauge_field(const HamiltonianFamily& family, const ParamPoint& p,
                             const LevelSelector& level, double h, double gap_tol) {
  GaugeFieldSample s;
  s.point = p;
  const int d = family.chart_dim;
  s.components.reserve(d);
  FramePair anchor = family.frame_provider
                         ? family.frame_provider(p)
                         : seed_frame(family, p, level, gap_tol);
  for (int mu = 0; mu < d; ++mu) {
    FramePair fp = frame_at(family, shifted(p, mu, h), anchor, level, gap_tol);
    FramePair fm = frame_at(family, shifted(p, mu, -h), anchor, level, gap_tol);
    ComplexMatrix K = kinetic_connection(family, p, mu, h);
    s.components.push_back(gauge_field_component(fm, anchor, fp, K, h));
  }
  return s;
}

double antihermiticity_residual(const HamiltonianFamily& family, const ParamPoint& p,
                                const LevelSelector& level, double h) {
  // Both fields come from the same stencil frames with the roles of |phi> and
  // |phi~> interchanged; the swapped system carries the metric eta^{-1}, so
  // its connection is K~ = -eta d(eta^{-1})/2 = (d eta) eta^{-1} / 2 = -K^dag.
  FramePair anchor = family.frame_provider
                         ? family.frame_provider(p)
                         : seed_frame(family, p, level, 1e-6);
  double worst = 0.0;
  for (int mu = 0; mu < family.chart_dim; ++mu) {
    FramePair fp = frame_at(family, shifted(p, mu, h), anchor, level, 1e-6);
    FramePair fm = frame_at(family, shifted(p, mu, -h), anchor, level, 1e-6);
    ComplexMatrix K = kinetic_connection(family, p, mu, h);
    ComplexMatrix A = gauge_field_component(fm, anchor, fp, K, h);
    FramePair sm{fm.left, fm.right}, sc{anchor.left, anchor.right},
        sp{fp.left, fp.right};
    ComplexMatrix At = gauge_field_component(sm, sc, sp, (-K).adjoint().eval(), h);
    for (Eigen::Index b = 0; b < A.rows(); ++b)
      for (Eigen::Index a = 0; a < A.cols(); ++a) {
        Complex lhs = std::conj(Complex(0, 1) * A(b, a));
        Complex rhs = -Complex(0, 1) * At(a, b);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
  }
  return worst;
}

std::vector<GaugeFieldSample> gauge_transform(
    const std::vector<GaugeFieldSample>& samples,
    const std::function<ComplexMatrix(const ParamPoint&)>& u_family, double h,
    const biortho::MetricOperator& eta_small) {
  std::vector<GaugeFieldSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    ComplexMatrix U = u_family(s.point);
    if (biortho::pseudo_unitarity_residual(U, eta_small) > 1e-8)
      throw NotPseudoUnitary("gauge_transform: U fails the pseudo-unitarity check");
    ComplexMatrix Uinv = U.inverse();
    GaugeFieldSample t;
    t.point = s.point;
    t.components.reserve(s.components.size());
    for (std::size_t mu = 0; mu < s.components.size(); ++mu) {
      ComplexMatrix Up = u_family(shifted(s.point, int(mu), h));
      ComplexMatrix Um = u_family(shifted(s.point, int(mu), -h));
      ComplexMatrix dU = (Up - Um) / (2.0 * h);
      t.components.push_back(Uinv * s.components[mu] * U +
                             Complex(0, 1) * Uinv * dU);
    }
    out.push_back(std::move(t));
  }
  return out;
}

HolonomyResult path_ordered_exponential(const std::vector<SegmentSample>& samples,
                                        const biortho::MetricOperator& eta_small) {
  if (samples.empty()) throw LoopNotClosed("path_ordered_exponential: no samples");
  const Eigen::Index n0 = samples.front().field.components.at(0).rows();
  ParamPoint net = ParamPoint::Zero(samples.front().delta.size());
  ComplexMatrix U = ComplexMatrix::Identity(n0, n0);
  HolonomyResult res;
  for (const auto& s : samples) {
    net += s.delta;
    ComplexMatrix B = ComplexMatrix::Zero(n0, n0);
    for (Eigen::Index mu = 0; mu < s.delta.size(); ++mu)
      B += s.field.components.at(mu) * s.delta(mu);
    ComplexMatrix expB = (Complex(0, 1) * B).exp();
    U = expB * U;  // later segments act on the left
    res.segment_log.push_back(std::move(B));
  }
  double scale = 0.0;
  for (const auto& s : samples) scale = std::max(scale, s.delta.cwiseAbs().maxCoeff());
  if (net.cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, scale))
    throw LoopNotClosed("path_ordered_exponential: displacements do not close");
  res.matrix = U;
  res.steps = int(samples.size());
  res.pseudo_unitarity_residual = biortho::pseudo_unitarity_residual(U, eta_small);
  return res;
}

namespace {

// Connection contracted with a chart direction, in the gauge anchored at
// (anchor), evaluated at q.  Central differences per active axis.
ComplexMatrix directional_connection(const HamiltonianFamily& family,
                                     const ParamPoint& q, const ParamPoint& dir,
                                     const FramePair& anchor, const LevelSelector& level,
                                     const HolonomyOptions& opts,
                                     bool metric_constant) {
  FramePair center = frame_at(family, q, anchor, level, opts.gap_tol);
  const Eigen::Index n0 = center.block_size();
  ComplexMatrix B = ComplexMatrix::Zero(n0, n0);
  for (int mu = 0; mu < family.chart_dim; ++mu) {
    if (dir(mu) == 0.0) continue;
    FramePair fp = frame_at(family, shifted(q, mu, opts.fd_step), anchor, level,
                            opts.gap_tol);
    FramePair fm = frame_at(family, shifted(q, mu, -opts.fd_step), anchor, level,
                            opts.gap_tol);
    ComplexMatrix K = metric_constant
                          ? ComplexMatrix::Zero(family.dim, family.dim)
                          : kinetic_connection(family, q, mu, opts.fd_step);
    B += gauge_field_component(fm, center, fp, K, opts.fd_step) * dir(mu);
  }
  return B;
}

}  // namespace

HolonomyResult holonomy_of_loop(const HamiltonianFamily& family, const ParamLoop& loop,
                                const LevelSelector& level, int n_steps,
                                const HolonomyOptions& opts) {
  loop.validate();
  if (!loop.closed) throw LoopNotClosed("holonomy_of_loop: loop must be closed");
  if (n_steps < 1) throw ParamDomain("holonomy_of_loop: n_steps must be >= 1");

  const double Ltot = loop.total_length();
  if (Ltot == 0.0) {
    // degenerate loop: identity holonomy by convention
    FramePair base = family.frame_provider
                         ? family.frame_provider(loop.points.front())
                         : seed_frame(family, loop.points.front(), level, opts.gap_tol);
    HolonomyResult res;
    res.matrix = ComplexMatrix::Identity(base.block_size(), base.block_size());
    res.steps = 0;
    auto eta_D = restricted_metric(family.metric_at(loop.points.front()), base.right);
    res.pseudo_unitarity_residual =
        biortho::pseudo_unitarity_residual(res.matrix, eta_D);
    return res;
  }

  // Detect a chart-constant metric once; K_mu vanishes then.
  bool metric_constant = false;
  if (family.metric) {
    ComplexMatrix e0 = family.metric_at(loop.points.front()).matrix;
    ComplexMatrix e1 = family.metric_at(loop.points.at(1)).matrix;
    ParamPoint mid = 0.5 * (loop.points.front() + loop.points.at(1));
    ComplexMatrix e2 = family.metric_at(mid).matrix;
    metric_constant = relative_residual(e1 - e0, e0) < 1e-13 &&
                      relative_residual(e2 - e0, e0) < 1e-13;
  }

  FramePair base = family.frame_provider
                       ? family.frame_provider(loop.points.front())
                       : seed_frame(family, loop.points.front(), level, opts.gap_tol);
  FramePair anchor = base;
  const Eigen::Index n0 = base.block_size();
  ComplexMatrix U = ComplexMatrix::Identity(n0, n0);
  HolonomyResult res;
  res.reanchor_count = 0;
  const bool midpoint = opts.integrator == HolonomyOptions::Integrator::Midpoint;
  std::vector<SegmentSample> midpoint_samples;

  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;

  int total_segments = 0;
  for (std::size_t e = 0; e + 1 < loop.points.size(); ++e) {
    double len = loop.edge_length(e);
    if (len == 0.0) continue;
    int ns = std::max(1, int(std::lround(double(n_steps) * len / Ltot)));
    const ParamPoint& a = loop.points[e];
    const ParamPoint d = (loop.points[e + 1] - loop.points[e]) / double(ns);
    for (int k = 0; k < ns; ++k) {
      if (midpoint) {
        // one field sample per segment midpoint, reduced later by the
        // path-ordered product; seamless re-anchoring keeps the gauge
        // continuous across patches, so the samples compose directly
        ParamPoint qm = a + (k + 0.5) * d;
        SegmentSample seg;
        seg.field.point = qm;
        seg.delta = d;
        FramePair center = frame_at(family, qm, anchor, level, opts.gap_tol);
        for (int mu = 0; mu < family.chart_dim; ++mu) {
          if (d(mu) == 0.0) {
            seg.field.components.push_back(ComplexMatrix::Zero(n0, n0));
            continue;
          }
          FramePair fp =
              frame_at(family, shifted(qm, mu, opts.fd_step), anchor, level, opts.gap_tol);
          FramePair fm =
              frame_at(family, shifted(qm, mu, -opts.fd_step), anchor, level, opts.gap_tol);
          ComplexMatrix K = metric_constant
                                ? ComplexMatrix::Zero(family.dim, family.dim)
                                : kinetic_connection(family, qm, mu, opts.fd_step);
          seg.field.components.push_back(
              gauge_field_component(fm, center, fp, K, opts.fd_step));
        }
        midpoint_samples.push_back(std::move(seg));
      } else {
        ParamPoint q1 = a + (k + c1) * d;
        ParamPoint q2 = a + (k + c2) * d;
        ComplexMatrix G1 =
            Complex(0, 1) *
            directional_connection(family, q1, d, anchor, level, opts, metric_constant);
        ComplexMatrix G2 =
            Complex(0, 1) *
            directional_connection(family, q2, d, anchor, level, opts, metric_constant);
        ComplexMatrix Om =
            0.5 * (G1 + G2) + (std::sqrt(3.0) / 12.0) * (G2 * G1 - G1 * G2);
        U = (Om.exp() * U).eval();
        if (opts.keep_segment_log) res.segment_log.push_back(-Complex(0, 1) * Om);
      }
      ++total_segments;
      if (!family.frame_provider) {
        double smin = 1.0;
        FramePair fend =
            section_frames(family, a + (k + 1.0) * d, anchor, level, opts.gap_tol, &smin);
        if (smin < opts.reanchor_threshold) {
          anchor = fend;  // seamless: the section equals itself at this point
          ++res.reanchor_count;
        }
      }
    }
  }

  auto eta_D = restricted_metric(family.metric_at(loop.points.front()), base.right);
  if (midpoint) {
    HolonomyResult inner = path_ordered_exponential(midpoint_samples, eta_D);
    U = inner.matrix;
    if (opts.keep_segment_log) res.segment_log = std::move(inner.segment_log);
  }

  // Gauge closure: express the final section frame at the base point in the
  // base frame.  Identity when a single anchor survived the loop.
  FramePair fin = frame_at(family, loop.points.back(), anchor, level, opts.gap_tol);
  ComplexMatrix closure = base.left.adjoint() * fin.right;
  res.matrix = closure * U;
  res.steps = total_segments;
  res.pseudo_unitarity_residual =
      biortho::pseudo_unitarity_residual(res.matrix, eta_D);
  require_finite(res.matrix, "holonomy_of_loop");
  return res;
}

Complex dynamical_phase(const std::function<double(double)>& E0, double T,
                        int n_steps) {
  if (T <= 0.0) throw ParamDomain("dynamical_phase: T must be positive");
  if (n_steps < 1) throw ParamDomain("dynamical_phase: n_steps must be >= 1");
  const double dt = T / n_steps;
  double integral = 0.0;
  for (int k = 0; k < n_steps; ++k)
    integral += 0.5 * (E0(k * dt) + E0((k + 1) * dt)) * dt;
  return std::exp(Complex(0, -1) * integral);
}

biortho::MetricOperator restricted_metric(const biortho::MetricOperator& eta,
                                          const ComplexMatrix& frame) {
  return biortho::MetricOperator::from_matrix(frame.adjoint() * eta.matrix * frame);
}

}  // namespace holoq::gauge
