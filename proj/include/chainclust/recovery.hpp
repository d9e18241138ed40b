#pragma once

#include "chainclust/matrix_core.hpp"
#include "chainclust/spectral.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace chainclust {

/// Which singular subspace the column distances are taken from.
enum class Side { right, left };

/// Norm used to score a decoupled candidate against T(x).
enum class NormChoice { frobenius, spectral };

enum class RecoveryMode { oracle_epsilon, known_sizes, empirical };

std::string to_string(Side side);
std::string to_string(NormChoice norm);
std::string to_string(RecoveryMode mode);

/// Slack added to the oracle threshold 2 epsilon so that same-block column
/// distances that are zero in exact arithmetic still merge at x = 0.
inline constexpr double kOracleThresholdSlack = 1e-9;

/// ||P e_i - P e_j||_2 for every unordered pair i < j.
class DistanceTable {
 public:
  struct Entry {
    std::size_t i;
    std::size_t j;
    double distance;
  };

  DistanceTable() = default;
  /// Column distances of a symmetric idempotent; DomainError otherwise.
  explicit DistanceTable(const Matrix& projector);

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return entries_.size(); }
  double distance(std::size_t i, std::size_t j) const;
  /// Pairs in lexicographic order.
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  /// d_1 >= d_2 >= ..., ties in lexicographic pair order.
  const std::vector<Entry>& sorted() const noexcept { return sorted_; }
  std::vector<double> sorted_values() const;

 private:
  std::size_t n_ = 0;
  std::vector<Entry> entries_;
  std::vector<Entry> sorted_;
};

DistanceTable pairwise_distances(const Matrix& projector);

/// Connected components of the graph with an edge wherever distance <= tau.
/// Blocks are ordered by their smallest element. tau must be >= 0.
ClusterPartition threshold_partition(const DistanceTable& d, double tau);

/// 0-based positions i of a nonincreasing list with d[i] >= 2 d[i+1]
/// (a zero successor counts iff d[i] > 0).
std::vector<std::size_t> gap_indices(std::span<const double> sorted_desc);
std::vector<std::size_t> gap_indices(const DistanceTable& d);

/// floor(log2(2 sqrt(n) + 1)): how many gap indices the empirical threshold
/// search tries.
std::size_t gap_budget(std::size_t n);

/// Threshold 2 epsilon (plus kOracleThresholdSlack) from a known epsilon.
struct OracleEpsilon {
  double epsilon;
};

/// Threshold sqrt(1/n_1 + 1/n_2) / 2 from the two largest cluster sizes.
struct KnownSizes {
  std::size_t n1;
  std::size_t n2;
};

using ThresholdRule = std::variant<OracleEpsilon, KnownSizes>;

/// One candidate evaluated by the empirical threshold search.
struct GapTrial {
  std::size_t gap_index;  ///< 0-based position in the sorted distances
  double threshold;       ///< d_{i+1}
  std::size_t blocks;
  double residual;        ///< ||T_hat - T(x)||
  bool eligible;          ///< produced exactly k blocks
};

struct RecoveryResult {
  ClusterPartition partition;
  double threshold_used = 0.0;
  RecoveryMode mode = RecoveryMode::oracle_epsilon;
  Side side = Side::right;
  /// Gap between the k-th and (k+1)-th smallest singular value of I - T(x).
  double spectral_gap = 0.0;
  /// Empirical mode only.
  std::vector<GapTrial> trials;
  std::optional<std::size_t> selected_trial;
  double residual = 0.0;
  /// The tau-relation is an equivalence (every pair inside a block is
  /// within tau) with exactly k classes.
  bool consistent = false;
};

/// Decoupled sub-stochastic T_hat (entries of t outside the blocks zeroed).
Matrix decoupled_part(const Matrix& t, const ClusterPartition& partition);

/// ||T_hat - T|| = norm of the mass outside the diagonal blocks.
double decoupling_residual(const Matrix& t, const ClusterPartition& partition, NormChoice norm);

/// Projector on the chosen side of the k-smallest singular split of I - t_x.
Matrix recovery_projector(const Matrix& t_x, std::size_t k, Side side,
                          double* spectral_gap = nullptr, double gap_tol = kDefaultGapTol);

/// Threshold clustering of projector columns with an oracle or known-sizes
/// threshold.
RecoveryResult recover_exact(const Matrix& t_x, std::size_t k, const ThresholdRule& rule,
                             Side side = Side::right, double gap_tol = kDefaultGapTol);

/// Threshold chosen from the first gap_budget(n) gap indices of the sorted
/// distances; the k-block candidate with the smallest decoupling residual
/// wins. Throws NoGapError when no gap exists or none gives k blocks.
RecoveryResult recover_empirical(const Matrix& t_x, std::size_t k,
                                 NormChoice norm = NormChoice::frobenius,
                                 Side side = Side::right, double gap_tol = kDefaultGapTol);

struct ApproxClusterResult {
  std::size_t selected_j = 0;
  IndexSet s_hat;
  double score = 0.0;     ///< ||P 1_{s_hat}||_2
  double size_cap = 0.0;  ///< (1 + 8 eps^2) s
  std::size_t admitted_size = 0;  ///< floor of size_cap
};

/// Candidate sets S_hat(j) = {i : P_ij >= 1/(2s)} for equal cluster size
/// s = n/k; among those with |S_hat(j)| <= floor((1 + 8 eps^2) s) returns
/// the one maximizing ||P 1_{S_hat(j)}||_2 (smallest j on ties).
ApproxClusterResult recover_one_approx(const Matrix& t_x, std::size_t k, double epsilon,
                                       Side side = Side::right,
                                       double gap_tol = kDefaultGapTol);

/// Per-k record of the search over the number of clusters.
struct KTrial {
  std::size_t k;
  std::optional<double> residual;
  std::optional<double> spectral_gap;
  std::optional<double> score;  ///< residual / spectral_gap
  std::string error;
};

struct KEstimate {
  std::size_t k = 0;
  RecoveryResult result;
  std::vector<KTrial> trials;
};

/// Runs recover_empirical for k = 2..k_max and keeps the k minimizing
/// residual / spectral gap (smallest k on ties).
KEstimate estimate_k(const Matrix& t_x, std::size_t k_max,
                     NormChoice norm = NormChoice::frobenius, double gap_tol = kDefaultGapTol);

/// Equality as set families.
bool partition_match(const ClusterPartition& a, const ClusterPartition& b);

/// |A symmetric-difference B| for sorted index sets.
std::size_t symmetric_difference_size(const IndexSet& a, const IndexSet& b);
std::size_t intersection_size(const IndexSet& a, const IndexSet& b);

/// (block index, |S_i symdiff s_hat|) minimizing the symmetric difference,
/// ties to the smallest block index.
std::pair<std::size_t, std::size_t> symdiff_min(const IndexSet& s_hat,
                                                const ClusterPartition& truth);

}  // namespace chainclust
