#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace holoq {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct NonDiagonalizable : Error { using Error::Error; };
struct GapClosure : Error { using Error::Error; };
struct PairingAmbiguity : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };
struct LoopNotClosed : Error { using Error::Error; };
struct NotPseudoUnitary : Error { using Error::Error; };
struct ParamDomain : Error { using Error::Error; };
struct ExcessLeakage : Error { using Error::Error; };
struct NonFiniteState : Error { using Error::Error; };
struct LevelNotFound : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };

/// Frobenius norm of x relative to ref (absolute when ref vanishes).
inline double relative_residual(const ComplexMatrix& x, const ComplexMatrix& ref) {
  double r = ref.norm();
  return r > 0.0 ? x.norm() / r : x.norm();
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline void require_finite(const ComplexMatrix& m, const std::string& what) {
  if (!m.allFinite()) throw NonFiniteState(what + ": non-finite entries");
}

inline void require_square(const ComplexMatrix& m, const std::string& what) {
  if (m.rows() != m.cols())
    throw DimensionMismatch(what + ": matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected square");
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const std::string& what) {
  if (a != b)
    throw DimensionMismatch(what + ": dimensions " + std::to_string(a) + " vs " +
                            std::to_string(b));
}

}  // namespace holoq
