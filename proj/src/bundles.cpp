#include "holoq/bundles.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

namespace holoq::bundles {

StiefelFrame stiefel_frame(const biortho::BiorthoSystem& system, Complex level,
                           const biortho::MetricOperator* eta_small) {
  std::size_t b = system.nearest_block(level);
  double scale = system.eigenvalues.size()
                     ? system.eigenvalues.cwiseAbs().maxCoeff()
                     : 0.0;
  double reach = std::max(10.0 * system.degeneracy_tol, 1e-6 * std::max(scale, 1.0));
  if (std::abs(system.blocks[b].eigenvalue - level) > reach)
    throw LevelNotFound("stiefel_frame: no block near the requested eigenvalue");

  StiefelFrame f;
  f.eta_big = biortho::metric_from_left(system);
  const Eigen::Index nl = system.blocks[b].size;
  f.eta_small = eta_small ? *eta_small : biortho::MetricOperator::identity(nl);
  require_same_dim(f.eta_small.dim(), nl, "stiefel_frame eta_small");
  // block columns satisfy V^dag eta V = 1, so the eta_small^{1/2} scaling
  // makes V^ddag V = eta_small^{-1/2} ... eta_small^{1/2} = 1 exact
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(f.eta_small.matrix);
  ComplexMatrix root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
                       es.eigenvectors().adjoint();
  f.V = system.block_right(b) * root;
  return f;
}

ComplexMatrix frame_pseudo_adjoint(const StiefelFrame& frame) {
  require_same_dim(frame.V.rows(), frame.eta_big.dim(), "frame_pseudo_adjoint");
  require_same_dim(frame.V.cols(), frame.eta_small.dim(), "frame_pseudo_adjoint");
  return frame.eta_small.inverse * frame.V.adjoint() * frame.eta_big.matrix;
}

GrassmannPoint grassmann_projector(const StiefelFrame& frame) {
  return {frame.V * frame_pseudo_adjoint(frame)};
}

double group_action_invariance(const StiefelFrame& frame, const ComplexMatrix& U) {
  if (biortho::pseudo_unitarity_residual(U, frame.eta_small) > 1e-10)
    throw NotPseudoUnitary("group_action_invariance: U is not eta_small-pseudo-unitary");
  StiefelFrame moved = frame;
  moved.V = frame.V * U;
  ComplexMatrix pi0 = grassmann_projector(frame).Pi;
  ComplexMatrix pi1 = grassmann_projector(moved).Pi;
  return (pi1 - pi0).norm();
}

ComplexMatrix random_pseudo_unitary(const biortho::MetricOperator& eta_small,
                                    std::uint64_t seed, double scale) {
  const Eigen::Index n = eta_small.dim();
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return (rng() >> 11) * 0x1.0p-53 + 0x1.0p-54; };
  ComplexMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double u = uniform(), v = uniform();
      double r = std::sqrt(-2.0 * std::log(u));
      a(i, j) = Complex(r * std::cos(2 * M_PI * v), r * std::sin(2 * M_PI * v));
    }
  ComplexMatrix herm = 0.5 * (a + a.adjoint());
  ComplexMatrix X = eta_small.inverse * herm;  // pseudo-Hermitian generator
  return (Complex(0, 1) * scale * X).exp();
}

}  // namespace holoq::bundles
