#include "holoq/biortho.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace holoq::biortho {

namespace {

bool spectral_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

double default_tol(const ComplexVector& eigs) {
  double scale = eigs.size() ? eigs.cwiseAbs().maxCoeff() : 0.0;
  return scale > 0.0 ? 1e-8 * scale : 1e-8;
}

// Rotate v so its largest-magnitude entry is real positive; deterministic output.
void fix_phase(Eigen::Ref<ComplexVector> v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  Complex z = v(imax);
  if (std::abs(z) > 0.0) v *= std::conj(z) / std::abs(z);
}

std::vector<DegeneracyBlock> cluster(const ComplexVector& eigs, double tol) {
  std::vector<DegeneracyBlock> blocks;
  Eigen::Index i = 0;
  while (i < eigs.size()) {
    Eigen::Index j = i + 1;
    while (j < eigs.size() && std::abs(eigs(j) - eigs(j - 1)) <= tol) ++j;
    Complex mean = 0.0;
    for (Eigen::Index k = i; k < j; ++k) mean += eigs(k);
    mean /= double(j - i);
    blocks.push_back({mean, i, j - i});
    i = j;
  }
  return blocks;
}

}  // namespace

std::size_t BiorthoSystem::nearest_block(Complex target) const {
  if (blocks.empty()) throw LevelNotFound("nearest_block: empty system");
  std::size_t best = 0;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    double d = std::abs(blocks[b].eigenvalue - target);
    if (d < dmin) { dmin = d; best = b; }
  }
  return best;
}

MetricOperator MetricOperator::identity(Eigen::Index n) {
  MetricOperator eta;
  eta.matrix = ComplexMatrix::Identity(n, n);
  eta.inverse = eta.matrix;
  eta.hermiticity_residual = 0.0;
  eta.min_eigenvalue = 1.0;
  return eta;
}

MetricOperator MetricOperator::from_matrix(const ComplexMatrix& m) {
  require_square(m, "MetricOperator");
  require_finite(m, "MetricOperator");
  MetricOperator eta;
  eta.hermiticity_residual = relative_residual(m - m.adjoint(), m);
  eta.matrix = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(eta.matrix);
  eta.min_eigenvalue = es.eigenvalues().minCoeff();
  eta.inverse = es.eigenvectors() *
                es.eigenvalues().cwiseInverse().asDiagonal() *
                es.eigenvectors().adjoint();
  return eta;
}

BiorthoSystem biorthogonal_eig(const ComplexMatrix& H, double degeneracy_tol) {
  require_square(H, "biorthogonal_eig");
  require_finite(H, "biorthogonal_eig");
  const Eigen::Index n = H.rows();

  Eigen::ComplexEigenSolver<ComplexMatrix> right_solver(H, true);
  Eigen::ComplexEigenSolver<ComplexMatrix> left_solver(H.adjoint(), true);
  if (right_solver.info() != Eigen::Success || left_solver.info() != Eigen::Success)
    throw NonDiagonalizable("biorthogonal_eig: eigensolver failed to converge");

  std::vector<Eigen::Index> ridx(n), lidx(n);
  std::iota(ridx.begin(), ridx.end(), 0);
  std::iota(lidx.begin(), lidx.end(), 0);
  const auto& revals = right_solver.eigenvalues();
  const auto& levals = left_solver.eigenvalues();
  std::sort(ridx.begin(), ridx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return spectral_less(revals(a), revals(b));
  });
  // left eigenvalue of H for pairing is conj(eigenvalue of H^dag)
  std::sort(lidx.begin(), lidx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return spectral_less(std::conj(levals(a)), std::conj(levals(b)));
  });

  BiorthoSystem sys;
  sys.dim = n;
  sys.eigenvalues.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) sys.eigenvalues(i) = revals(ridx[i]);
  sys.degeneracy_tol =
      degeneracy_tol > 0.0 ? degeneracy_tol : default_tol(sys.eigenvalues);
  sys.blocks = cluster(sys.eigenvalues, sys.degeneracy_tol);
  sys.right_frame.resize(n, n);
  sys.left_frame.resize(n, n);

  for (const auto& blk : sys.blocks) {
    if (blk.size == 1) {
      ComplexVector r = right_solver.eigenvectors().col(ridx[blk.begin]);
      r.normalize();
      fix_phase(r);
      ComplexVector l = left_solver.eigenvectors().col(lidx[blk.begin]);
      Complex s = l.dot(r);  // <l|r>
      if (std::abs(s) < 1e-14)
        throw NonDiagonalizable("biorthogonal_eig: left/right pair nearly orthogonal");
      l /= std::conj(s);
      sys.right_frame.col(blk.begin) = r;
      sys.left_frame.col(blk.begin) = l;
    } else {
      // SVD null spaces of (H - mu*1); the raw eigenvectors of a degenerate
      // block can come out nearly parallel.
      ComplexMatrix A = H - blk.eigenvalue * ComplexMatrix::Identity(n, n);
      Eigen::JacobiSVD<ComplexMatrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
      ComplexMatrix Rb = svd.matrixV().rightCols(blk.size);
      ComplexMatrix Lb = svd.matrixU().rightCols(blk.size);
      ComplexMatrix S = Lb.adjoint() * Rb;
      Eigen::JacobiSVD<ComplexMatrix> ssvd(S);
      if (ssvd.singularValues().minCoeff() < 1e-10)
        throw NonDiagonalizable(
            "biorthogonal_eig: degenerate block defective (left/right overlap singular)");
      for (Eigen::Index c = 0; c < blk.size; ++c) fix_phase(Rb.col(c));
      S = Lb.adjoint() * Rb;
      Rb = Rb * S.inverse();
      sys.right_frame.middleCols(blk.begin, blk.size) = Rb;
      sys.left_frame.middleCols(blk.begin, blk.size) = Lb;
    }
  }

  ComplexMatrix rebuilt = sys.right_frame * sys.eigenvalues.asDiagonal() *
                          sys.left_frame.adjoint();
  sys.reconstruction_residual = relative_residual(rebuilt - H, H);
  if (sys.reconstruction_residual > 1e-6)
    throw NonDiagonalizable("biorthogonal_eig: reconstruction residual " +
                            std::to_string(sys.reconstruction_residual) +
                            " signals an exceptional point");
  return sys;
}

MetricOperator metric_from_left(const BiorthoSystem& sys) {
  return MetricOperator::from_matrix(sys.left_frame * sys.left_frame.adjoint());
}

Complex eta_inner(const MetricOperator& eta, const ComplexVector& phi,
                  const ComplexVector& psi) {
  require_same_dim(phi.size(), psi.size(), "eta_inner");
  require_same_dim(phi.size(), eta.dim(), "eta_inner");
  return phi.dot(eta.matrix * psi);
}

ComplexMatrix pseudo_adjoint(const MetricOperator& eta, const ComplexMatrix& M) {
  require_square(M, "pseudo_adjoint");
  require_same_dim(M.rows(), eta.dim(), "pseudo_adjoint");
  return eta.inverse * M.adjoint() * eta.matrix;
}

double pseudo_hermiticity_residual(const ComplexMatrix& H, const MetricOperator& eta) {
  require_square(H, "pseudo_hermiticity_residual");
  require_same_dim(H.rows(), eta.dim(), "pseudo_hermiticity_residual");
  return relative_residual(H.adjoint() * eta.matrix - eta.matrix * H, eta.matrix);
}

double pseudo_unitarity_residual(const ComplexMatrix& U, const MetricOperator& eta) {
  require_square(U, "pseudo_unitarity_residual");
  require_same_dim(U.rows(), eta.dim(), "pseudo_unitarity_residual");
  return relative_residual(U.adjoint() * eta.matrix * U - eta.matrix, eta.matrix);
}

namespace {

// Fully specified Gaussian source; std::normal_distribution is
// implementation-defined and would break the bit-identical-output contract.
struct Gauss {
  std::mt19937_64 rng;
  explicit Gauss(std::uint64_t seed) : rng(seed) {}
  double uniform() {
    return (rng() >> 11) * 0x1.0p-53 + 0x1.0p-54;  // (0,1)
  }
  double operator()() {
    double u = uniform(), v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
  }
  Complex complex_gauss() {
    double re = (*this)(), im = (*this)();
    return Complex(re, im) / std::sqrt(2.0);
  }
  ComplexMatrix matrix(Eigen::Index n) {
    ComplexMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = complex_gauss();
    return m;
  }
};

}  // namespace

std::pair<ComplexMatrix, MetricOperator> random_pseudo_hermitian(Eigen::Index n,
                                                                 std::uint64_t seed) {
  if (n < 1) throw ParamDomain("random_pseudo_hermitian: n must be >= 1");
  Gauss g(seed);
  ComplexMatrix a = g.matrix(n);
  ComplexMatrix h = 0.5 * (a + a.adjoint());
  // S = Q1 D Q2^dag with singular values in [0.5, 5]: condition <= 10
  ComplexMatrix q1 = Eigen::HouseholderQR<ComplexMatrix>(g.matrix(n)).householderQ();
  ComplexMatrix q2 = Eigen::HouseholderQR<ComplexMatrix>(g.matrix(n)).householderQ();
  RealVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = 0.5 + 4.5 * g.uniform();
  ComplexMatrix S = q1 * d.asDiagonal() * q2.adjoint();
  ComplexMatrix Sinv = S.inverse();
  ComplexMatrix H = S * h * Sinv;
  MetricOperator eta = MetricOperator::from_matrix((S * S.adjoint()).inverse());
  return {H, eta};
}

BlockSubspaces block_subspaces(const ComplexMatrix& H, Complex target,
                               double degeneracy_tol) {
  require_square(H, "block_subspaces");
  const Eigen::Index n = H.rows();
  Eigen::ComplexEigenSolver<ComplexMatrix> es(H, false);
  if (es.info() != Eigen::Success)
    throw NonDiagonalizable("block_subspaces: eigensolver failed");
  ComplexVector eigs = es.eigenvalues();
  std::sort(eigs.data(), eigs.data() + n, spectral_less);
  double tol = degeneracy_tol > 0.0 ? degeneracy_tol : default_tol(eigs);
  auto blocks = cluster(eigs, tol);

  std::size_t best = 0;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    double d = std::abs(blocks[b].eigenvalue - target);
    if (d < dmin) { dmin = d; best = b; }
  }
  const auto& blk = blocks[best];

  BlockSubspaces sub;
  sub.eigenvalue = blk.eigenvalue;
  sub.size = blk.size;
  sub.gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i >= blk.begin && i < blk.begin + blk.size) continue;
    sub.gap = std::min(sub.gap, std::abs(eigs(i) - blk.eigenvalue));
  }

  ComplexMatrix A = H - blk.eigenvalue * ComplexMatrix::Identity(n, n);
  Eigen::JacobiSVD<ComplexMatrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  sub.right = svd.matrixV().rightCols(blk.size);
  sub.left = svd.matrixU().rightCols(blk.size);
  return sub;
}

ComplexMatrix spectral_projector(const BlockSubspaces& sub) {
  ComplexMatrix S = sub.left.adjoint() * sub.right;
  Eigen::JacobiSVD<ComplexMatrix> ssvd(S);
  if (ssvd.singularValues().minCoeff() < 1e-12)
    throw NonDiagonalizable("spectral_projector: block left/right overlap singular");
  return sub.right * S.inverse() * sub.left.adjoint();
}

}  // namespace holoq::biortho
