#pragma once

#include "chainclust/matrix_core.hpp"

#include <cstddef>
#include <vector>

namespace chainclust {

/// Default minimum separation between the k-th and (k+1)-th smallest
/// singular values before a split projector is considered ill-defined.
inline constexpr double kDefaultGapTol = 1e-10;

/// S(A) = [[0, A], [A^T, 0]].
///
/// Entries are copied, so the result is exactly symmetric. Its eigenvalues
/// are +-sigma_i(A) and its spectral norm equals that of A.
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = a.rows();
  const Eigen::Index m = a.cols();
  MatrixX<Scalar> s = MatrixX<Scalar>::Zero(n + m, n + m);
  s.topRightCorner(n, m) = a;
  s.bottomLeftCorner(m, n) = a.transpose();
  return s;
}

/// Orthogonal projector B B^T onto the span of orthonormal columns B.
template <typename Derived>
MatrixX<typename Derived::Scalar> projector_from_basis(const Eigen::MatrixBase<Derived>& basis) {
  return basis * basis.transpose();
}

/// A (+) B.
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> direct_sum(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

/// Singular values in ascending order.
Vector singular_values_ascending(const Matrix& m);

/// ||m||_2 (largest singular value).
double spectral_norm(const Matrix& m);

/// The k smallest singular values of a square matrix together with the
/// projectors onto their left and right singular subspaces.
struct SpectralSplit {
  std::size_t k = 0;
  Vector small_sigmas;  ///< ascending
  Vector large_sigmas;  ///< ascending
  Matrix p_left;        ///< U_k U_k^T
  Matrix p_right;       ///< V_k V_k^T
  double gap = 0.0;     ///< min(large_sigmas) - max(small_sigmas)
  Matrix u_k;           ///< left singular vectors of the small values
  Matrix v_k;           ///< right singular vectors of the small values
};

/// Full SVD of m, split into the k smallest singular values and the rest.
///
/// Throws ParameterError unless 1 <= k < n and DegenerateGapError when the
/// gap is below gap_tol.
SpectralSplit spectral_split(const Matrix& m, std::size_t k, double gap_tol = kDefaultGapTol);

/// Eigen-split of a symmetric matrix by absolute value: projector onto the
/// eigenvectors of the k eigenvalues smallest in |lambda|.
struct SymmetricSplit {
  std::size_t k = 0;
  Vector small_abs;  ///< ascending |lambda|
  Vector large_abs;  ///< ascending |lambda|
  Matrix projector;
  double gap = 0.0;
};

SymmetricSplit symmetric_split(const Matrix& a, std::size_t k, double gap_tol = kDefaultGapTol);

/// Closed-form P^L(0), P^R(0) of a purely clustered chain.
struct IdealProjectorPair {
  Matrix p_left;                ///< (+) u_i u_i^T
  Matrix p_right;               ///< (+) (1/|S_i|) 1 1^T
  std::vector<Vector> stationary;  ///< u_i per block, positive with unit 2-norm
};

IdealProjectorPair ideal_projector(const DecoupledChain& chain);

/// Left Perron vector of an irreducible stochastic matrix, unit 2-norm.
///
/// Solves (T^T - I) pi = 0 with the last equation replaced by sum(pi) = 1,
/// then rescales; falls back to power iteration if that system is singular
/// to working precision.
Vector left_perron_vector(const Matrix& block);

/// Power iteration on the lazy chain (I + T)/2 until successive iterates
/// differ by less than tol in max norm. Unit 2-norm result.
Vector left_perron_vector_power(const Matrix& block, double tol = 1e-12);

}  // namespace chainclust
