#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chainclust {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Sorted list of 0-based state indices.
using IndexSet = std::vector<std::size_t>;

/// Row sums of a stochastic matrix produced by the generators match 1 to this.
inline constexpr double kGenerationTol = 1e-12;
/// Looser tolerance after arithmetic such as T_0 + x E.
inline constexpr double kArithmeticTol = 1e-10;

/// n x n identity.
inline Matrix identity(std::size_t n) {
  return Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

/// j-th standard basis vector of R^n (0-based).
inline Vector basis_vector(std::size_t n, std::size_t j) {
  Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
  e(static_cast<Eigen::Index>(j)) = 1.0;
  return e;
}

/// I - T.
template <typename Derived>
MatrixX<typename Derived::Scalar> laplacian(const Eigen::MatrixBase<Derived>& t) {
  using Scalar = typename Derived::Scalar;
  return MatrixX<Scalar>::Identity(t.rows(), t.cols()) - t;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// A partition of {0, ..., n-1} into nonempty disjoint blocks.
///
/// Block order is preserved as given (it identifies S_1, ..., S_k); the
/// elements inside each block are kept sorted.
class ClusterPartition {
 public:
  ClusterPartition() = default;
  ClusterPartition(std::size_t n, std::vector<IndexSet> blocks);

  /// Consecutive blocks {0..s_1-1}, {s_1..s_1+s_2-1}, ...
  static ClusterPartition from_sizes(std::span<const std::size_t> sizes);
  /// Blocks from a label per state; labels need not be contiguous.
  static ClusterPartition from_labels(std::span<const std::size_t> labels);

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return blocks_.size(); }
  const std::vector<IndexSet>& blocks() const noexcept { return blocks_; }
  const IndexSet& block(std::size_t i) const { return blocks_.at(i); }

  /// Block sizes in block order.
  std::vector<std::size_t> sizes() const;
  /// n_1 >= n_2 >= ... >= n_k.
  std::vector<std::size_t> sizes_descending() const;
  /// Index of the block containing state j.
  std::size_t block_of(std::size_t j) const { return labels_.at(j); }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }

  /// Same set family with blocks ordered by their smallest element.
  ClusterPartition canonical() const;

  friend bool operator==(const ClusterPartition&, const ClusterPartition&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<IndexSet> blocks_;
  std::vector<std::size_t> labels_;
};

/// T_0 = T_1 (+) ... (+) T_k with irreducible row-stochastic blocks.
class DecoupledChain {
 public:
  /// Validates every invariant; throws DomainError / DimensionError.
  DecoupledChain(Matrix matrix, ClusterPartition partition);

  const Matrix& matrix() const noexcept { return matrix_; }
  const ClusterPartition& partition() const noexcept { return partition_; }
  std::size_t n() const noexcept { return partition_.n(); }
  std::size_t k() const noexcept { return partition_.k(); }

  /// Principal submatrix T_i on block i.
  Matrix block_matrix(std::size_t i) const;

 private:
  Matrix matrix_;
  ClusterPartition partition_;
};

/// (T_0, E, x_max) such that T(x) = T_0 + x E is stochastic on [0, x_max].
class PerturbationInstance {
 public:
  PerturbationInstance(DecoupledChain base, Matrix e, double x_max);

  const DecoupledChain& base() const noexcept { return base_; }
  const Matrix& e() const noexcept { return e_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t n() const noexcept { return base_.n(); }
  std::size_t k() const noexcept { return base_.k(); }

 private:
  DecoupledChain base_;
  Matrix e_;
  double x_max_;
};

struct Violation {
  enum class Kind { negative_entry, row_sum, non_finite };
  Kind kind;
  std::size_t row;
  std::optional<std::size_t> col;
  /// Offending value: the entry, or the row sum.
  double value;

  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::string describe() const;
};

/// Checks entries >= -tol and |row sum - 1| <= tol.
ValidationReport validate_stochastic(const Matrix& m, double tol);

/// Strong connectivity of the support digraph (edge i -> j iff m_ij > 0).
bool check_irreducible(const Matrix& m);

/// Random purely clustered chain with blocks laid out consecutively.
///
/// Rows are i.i.d. uniform weights on (0, 1], normalized, then mixed with
/// the uniform floor so every within-block entry is at least `min_entry`.
/// Requires min_entry * max(sizes) < 1.
DecoupledChain generate_decoupled(std::span<const std::size_t> sizes, std::uint64_t seed,
                                  double min_entry = 0.0);

/// E = Q - T_0 for a dense random row-stochastic Q; x_max = 1 so that
/// T(x) = (1 - x) T_0 + x Q.
PerturbationInstance generate_perturbation(const DecoupledChain& base, std::uint64_t seed);

/// T_0 + x E.
Matrix transition_at(const PerturbationInstance& inst, double x);

}  // namespace chainclust
