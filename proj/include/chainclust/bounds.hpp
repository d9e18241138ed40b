#pragma once

#include "chainclust/matrix_core.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace chainclust {

/// Additive slack on the right-hand side of every certified inequality.
inline constexpr double kCertificateSlack = 1e-10;

/// epsilon = 2 x ||E||_2 / (sigma_{n-k}(I - T_0) - 2 x ||E||_2).
struct EpsilonBound {
  double x = 0.0;
  double norm_e = 0.0;
  double sigma_gap = 0.0;
  double epsilon = 0.0;
};

/// Throws ParameterError on invalid inputs and OutOfRegimeError when
/// 2 x norm_e >= sigma_gap.
EpsilonBound epsilon_bound(double x, double norm_e, double sigma_gap);

/// Inverse of epsilon_bound in x.
double x_for_epsilon(double epsilon, double norm_e, double sigma_gap);

struct CertificateContext {
  std::size_t n = 0;
  std::size_t k = 0;
  double x = 0.0;
  std::uint64_t seed = 0;
};

/// One checked inequality lhs <= rhs (+ slack).
struct BoundCertificate {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  CertificateContext context;
  /// False when the hypothesis of the bound fails; such rows are reported
  /// but never count as violations.
  bool in_regime = true;
};

BoundCertificate make_certificate(std::string name, double lhs, double rhs,
                                  CertificateContext context);

/// Ground-truth constants of an instance: sigma_{n-k}(I - T_0) and ||E||_2.
struct InstanceConstants {
  std::size_t n = 0;
  std::size_t k = 0;
  double sigma_gap = 0.0;
  double norm_e = 0.0;

  /// Largest x with 2 x ||E||_2 < sigma_gap (exclusive supremum).
  double regime_limit() const { return sigma_gap / (2.0 * norm_e); }
};

InstanceConstants instance_constants(const PerturbationInstance& inst);

/// sigma_{n-k}(I - T): the (k+1)-th smallest singular value of the Laplacian.
double laplacian_sigma_gap(const Matrix& t, std::size_t k);

/// ||P_k(A) - P_k(B)||_2 <= 2 ||A - B||_2 / (beta - alpha) for symmetric A, B
/// whose k smallest |eigenvalues| are <= alpha and the rest >= beta.
///
/// Throws DomainError for asymmetric input and HypothesisError when the
/// spectral hypothesis fails.
BoundCertificate validate_symmetric_projector_bound(const Matrix& a, const Matrix& b,
                                                    std::size_t k, double alpha, double beta,
                                                    CertificateContext context = {});

/// Weyl envelope of the Laplacian singular values at x:
///   max_{i > n-k} sigma_i(I - T(x)) <= x ||E||_2
///   min_{i <= n-k} sigma_i(I - T(x)) >= sigma_{n-k}(I - T_0) - x ||E||_2
/// Returned as [small, large].
std::vector<BoundCertificate> weyl_envelope(const PerturbationInstance& inst, double x,
                                            std::size_t k, std::uint64_t seed = 0);

/// Deviations ||P^L(x) - P^L(0)||_2 and ||P^R(x) - P^R(0)||_2.
struct ProjectorDeviation {
  double left = 0.0;
  double right = 0.0;
};

ProjectorDeviation laplacian_projector_deviation(const PerturbationInstance& inst, double x);

/// max(left, right) deviation against epsilon at x. Throws OutOfRegimeError
/// outside 2 x ||E||_2 < sigma_{n-k}(I - T_0).
BoundCertificate validate_laplacian_projector_bound(const PerturbationInstance& inst, double x,
                                                    std::uint64_t seed = 0);

/// Largest x with epsilon(x) < c, c = sqrt(1/n_1 + 1/n_2) / 4; below it the
/// oracle threshold 2 epsilon separates same-block from cross-block pairs.
double exact_recovery_xmax(const ClusterPartition& partition, double sigma_gap, double norm_e);

/// sqrt(1/n_1 + 1/n_2) for the two largest blocks.
double min_cross_distance(const ClusterPartition& partition);

/// Random symmetric pair (A, B) of size n whose spectra satisfy the
/// hypothesis of the symmetric projector bound with the returned alpha, beta.
struct SymmetricPair {
  Matrix a;
  Matrix b;
  std::size_t k = 0;
  double alpha = 0.0;
  double beta = 0.0;
};

SymmetricPair generate_symmetric_pair(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace chainclust
