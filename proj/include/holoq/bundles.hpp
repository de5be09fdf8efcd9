#pragma once

#include "holoq/biortho.hpp"
#include "holoq/types.hpp"

#include <cstdint>

namespace holoq::bundles {

/// Biorthogonal frame V (N x n_l) with V^ddag V = 1, where
/// V^ddag = eta_small^{-1} V^dag eta_big.
struct StiefelFrame {
  ComplexMatrix V;
  biortho::MetricOperator eta_big;    // N x N
  biortho::MetricOperator eta_small;  // n_l x n_l
};

/// Pi = V V^ddag: Pi^2 = Pi, Pi^ddag = Pi, tr Pi = n_l.
struct GrassmannPoint {
  ComplexMatrix Pi;
};

/// Frame of the degeneracy block nearest to level; eta_big is rebuilt from the
/// system's left frame.  With a nontrivial eta_small the block columns are
/// scaled by eta_small^{1/2} so V^ddag V = 1 holds exactly.
StiefelFrame stiefel_frame(const biortho::BiorthoSystem& system, Complex level,
                           const biortho::MetricOperator* eta_small = nullptr);

/// V^ddag = eta_small^{-1} V^dag eta_big (n_l x N).
ComplexMatrix frame_pseudo_adjoint(const StiefelFrame& frame);

GrassmannPoint grassmann_projector(const StiefelFrame& frame);

/// | (VU)(VU)^ddag - V V^ddag |_F for U pseudo-unitary under eta_small;
/// throws NotPseudoUnitary when the input fails its residual check.
double group_action_invariance(const StiefelFrame& frame, const ComplexMatrix& U);

/// exp(i s X) with X pseudo-Hermitian under eta_small: always lands in the
/// eta_small pseudo-unitary group.  Deterministic in the seed.
ComplexMatrix random_pseudo_unitary(const biortho::MetricOperator& eta_small,
                                    std::uint64_t seed, double scale = 1.0);

}  // namespace holoq::bundles
