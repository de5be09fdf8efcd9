#pragma once

#include "holoq/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace holoq::biortho {

/// Group of indices sharing an eigenvalue within the degeneracy tolerance.
struct DegeneracyBlock {
  Complex eigenvalue;   // block mean
  Eigen::Index begin;   // first index into the sorted spectrum
  Eigen::Index size;
};

/// Eigendecomposition of a (generally non-Hermitian) matrix into paired
/// right/left frames with <phi~_n|phi_m> = delta_nm.
struct BiorthoSystem {
  Eigen::Index dim = 0;
  ComplexVector eigenvalues;    // sorted ascending by (Re, Im)
  ComplexMatrix right_frame;    // columns |phi_n>
  ComplexMatrix left_frame;     // columns |phi~_n>, left^dag * right = 1
  std::vector<DegeneracyBlock> blocks;
  double degeneracy_tol = 0.0;
  double reconstruction_residual = 0.0;  // |R E L^dag - H| / |H|

  ComplexMatrix block_right(std::size_t b) const {
    return right_frame.middleCols(blocks.at(b).begin, blocks.at(b).size);
  }
  ComplexMatrix block_left(std::size_t b) const {
    return left_frame.middleCols(blocks.at(b).begin, blocks.at(b).size);
  }
  /// Index of the block whose eigenvalue is nearest to target.
  std::size_t nearest_block(Complex target) const;
};

/// Hermitian positive-definite metric with cached inverse.
struct MetricOperator {
  ComplexMatrix matrix;
  ComplexMatrix inverse;
  double hermiticity_residual = 0.0;
  double min_eigenvalue = 0.0;

  Eigen::Index dim() const { return matrix.rows(); }
  static MetricOperator identity(Eigen::Index n);
  /// Builds the cached fields from a given eta (symmetrized internally).
  static MetricOperator from_matrix(const ComplexMatrix& eta);
};

/// Right/left eigenframes of H.  Within a degeneracy block the subspaces are
/// extracted from the SVD of (H - mu*1) and re-paired via S = L_b^dag R_b,
/// R_b <- R_b S^{-1}; a reconstruction residual above 1e-6 throws
/// NonDiagonalizable (exceptional point).  degeneracy_tol <= 0 selects the
/// default 1e-8 * max|E|.
BiorthoSystem biorthogonal_eig(const ComplexMatrix& H, double degeneracy_tol = -1.0);

/// eta = sum_n |phi~_n><phi~_n|.
MetricOperator metric_from_left(const BiorthoSystem& system);

/// <phi| eta |psi>.
Complex eta_inner(const MetricOperator& eta, const ComplexVector& phi,
                  const ComplexVector& psi);

/// M^ddag = eta^{-1} M^dag eta.
ComplexMatrix pseudo_adjoint(const MetricOperator& eta, const ComplexMatrix& M);

/// |H^dag eta - eta H| / |eta|.
double pseudo_hermiticity_residual(const ComplexMatrix& H, const MetricOperator& eta);

/// |U^dag eta U - eta| / |eta|.
double pseudo_unitarity_residual(const ComplexMatrix& U, const MetricOperator& eta);

/// Deterministic test-data generator: H = S h S^{-1} with h random Hermitian
/// and S of modest condition number; eta = (S S^dag)^{-1}.
std::pair<ComplexMatrix, MetricOperator> random_pseudo_hermitian(Eigen::Index n,
                                                                 std::uint64_t seed);

/// Right/left invariant subspaces of one degeneracy block, orthonormal bases,
/// via the SVD of (H - mu*1).  gap is the distance from the block to the rest
/// of the spectrum.
struct BlockSubspaces {
  ComplexMatrix right;  // N x n0, orthonormal columns
  ComplexMatrix left;   // N x n0, orthonormal columns
  Complex eigenvalue;
  Eigen::Index size = 0;
  double gap = 0.0;
};

BlockSubspaces block_subspaces(const ComplexMatrix& H, Complex target,
                               double degeneracy_tol = -1.0);

/// Oblique spectral projector P = R (L^dag R)^{-1} L^dag of the block.
ComplexMatrix spectral_projector(const BlockSubspaces& sub);

}  // namespace holoq::biortho
