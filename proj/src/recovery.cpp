#include "chainclust/recovery.hpp"

#include "chainclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace chainclust {

namespace {

using Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

void require_recovery_input(const Matrix& t_x, std::size_t k) {
  const ValidationReport report = validate_stochastic(t_x, kArithmeticTol);
  if (!report.ok()) throw DomainError("T(x) is not stochastic: " + report.describe());
  if (k < 2) throw ParameterError("recovery needs k >= 2");
  if (k >= static_cast<std::size_t>(t_x.rows())) throw ParameterError("recovery needs k < n");
}

bool relation_is_equivalence(const DistanceTable& d, const ClusterPartition& p, double tau) {
  for (const IndexSet& block : p.blocks()) {
    for (std::size_t a = 0; a < block.size(); ++a) {
      for (std::size_t b = a + 1; b < block.size(); ++b) {
        if (d.distance(block[a], block[b]) > tau) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::string to_string(Side side) { return side == Side::right ? "right" : "left"; }

std::string to_string(NormChoice norm) {
  return norm == NormChoice::frobenius ? "frobenius" : "spectral";
}

std::string to_string(RecoveryMode mode) {
  switch (mode) {
    case RecoveryMode::oracle_epsilon: return "oracle_epsilon";
    case RecoveryMode::known_sizes: return "known_sizes";
    case RecoveryMode::empirical: return "empirical";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Distances and thresholding

DistanceTable::DistanceTable(const Matrix& p) : n_(static_cast<std::size_t>(p.rows())) {
  if (p.rows() != p.cols()) throw DimensionError("projector must be square");
  if (!p.allFinite()) throw DomainError("projector has non-finite entries");
  const double asym = (p - p.transpose()).cwiseAbs().maxCoeff();
  const double idem = (p * p - p).cwiseAbs().maxCoeff();
  if (asym > 1e-6 || idem > 1e-6) {
    throw DomainError("matrix is not a symmetric idempotent (asymmetry " + std::to_string(asym) +
                      ", idempotency defect " + std::to_string(idem) + ")");
  }
  entries_.reserve(n_ * (n_ - 1) / 2);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      entries_.push_back({i, j, (p.col(idx(i)) - p.col(idx(j))).norm()});
    }
  }
  sorted_ = entries_;
  std::stable_sort(sorted_.begin(), sorted_.end(),
                   [](const Entry& a, const Entry& b) { return a.distance > b.distance; });
}

double DistanceTable::distance(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  if (j >= n_) throw DimensionError("distance index out of range");
  // row-major offset of (i, j) in the strict upper triangle
  const std::size_t offset = i * n_ - i * (i + 1) / 2 + (j - i - 1);
  return entries_[offset].distance;
}

std::vector<double> DistanceTable::sorted_values() const {
  std::vector<double> out;
  out.reserve(sorted_.size());
  for (const Entry& e : sorted_) out.push_back(e.distance);
  return out;
}

DistanceTable pairwise_distances(const Matrix& projector) { return DistanceTable(projector); }

ClusterPartition threshold_partition(const DistanceTable& d, double tau) {
  if (!(tau >= 0.0)) throw ParameterError("threshold must be >= 0");
  DisjointSets sets(d.n());
  for (const auto& e : d.entries()) {
    if (e.distance <= tau) sets.unite(e.i, e.j);
  }
  std::vector<std::size_t> labels(d.n());
  for (std::size_t v = 0; v < d.n(); ++v) labels[v] = sets.find(v);
  return ClusterPartition::from_labels(labels);
}

std::vector<std::size_t> gap_indices(std::span<const double> d) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    const bool gap = d[i + 1] == 0.0 ? d[i] > 0.0 : d[i] >= 2.0 * d[i + 1];
    if (gap) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> gap_indices(const DistanceTable& d) {
  const auto values = d.sorted_values();
  return gap_indices(std::span<const double>(values));
}

std::size_t gap_budget(std::size_t n) {
  return static_cast<std::size_t>(std::floor(std::log2(2.0 * std::sqrt(static_cast<double>(n)) + 1.0)));
}

// ---------------------------------------------------------------------------
// Decoupling

Matrix decoupled_part(const Matrix& t, const ClusterPartition& partition) {
  const auto& labels = partition.labels();
  Matrix out = t;
  for (Index i = 0; i < t.rows(); ++i) {
    for (Index j = 0; j < t.cols(); ++j) {
      if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) {
        out(i, j) = 0.0;
      }
    }
  }
  return out;
}

double decoupling_residual(const Matrix& t, const ClusterPartition& partition, NormChoice norm) {
  if (static_cast<std::size_t>(t.rows()) != partition.n()) {
    throw DimensionError("partition does not match matrix size");
  }
  const Matrix off = t - decoupled_part(t, partition);
  return norm == NormChoice::frobenius ? off.norm() : spectral_norm(off);
}

// ---------------------------------------------------------------------------
// Recovery

Matrix recovery_projector(const Matrix& t_x, std::size_t k, Side side, double* spectral_gap,
                          double gap_tol) {
  SpectralSplit split = spectral_split(laplacian(t_x), k, gap_tol);
  if (spectral_gap) *spectral_gap = split.gap;
  return side == Side::right ? std::move(split.p_right) : std::move(split.p_left);
}

RecoveryResult recover_exact(const Matrix& t_x, std::size_t k, const ThresholdRule& rule,
                             Side side, double gap_tol) {
  require_recovery_input(t_x, k);
  RecoveryResult result;
  result.side = side;
  if (const auto* oracle = std::get_if<OracleEpsilon>(&rule)) {
    if (!(oracle->epsilon >= 0.0) || !std::isfinite(oracle->epsilon)) {
      throw ParameterError("epsilon must be finite and >= 0");
    }
    result.mode = RecoveryMode::oracle_epsilon;
    result.threshold_used = 2.0 * oracle->epsilon + kOracleThresholdSlack;
  } else {
    const auto& sizes = std::get<KnownSizes>(rule);
    if (sizes.n1 == 0 || sizes.n2 == 0 ||
        sizes.n1 + sizes.n2 > static_cast<std::size_t>(t_x.rows())) {
      throw ParameterError("known sizes n1, n2 must be positive with n1 + n2 <= n");
    }
    result.mode = RecoveryMode::known_sizes;
    result.threshold_used =
        0.5 * std::sqrt(1.0 / static_cast<double>(sizes.n1) + 1.0 / static_cast<double>(sizes.n2));
  }
  const Matrix p = recovery_projector(t_x, k, side, &result.spectral_gap, gap_tol);
  const DistanceTable d(p);
  result.partition = threshold_partition(d, result.threshold_used);
  result.residual = decoupling_residual(t_x, result.partition, NormChoice::frobenius);
  result.consistent = result.partition.k() == k &&
                      relation_is_equivalence(d, result.partition, result.threshold_used);
  return result;
}

RecoveryResult recover_empirical(const Matrix& t_x, std::size_t k, NormChoice norm, Side side,
                                 double gap_tol) {
  require_recovery_input(t_x, k);
  RecoveryResult result;
  result.mode = RecoveryMode::empirical;
  result.side = side;
  const Matrix p = recovery_projector(t_x, k, side, &result.spectral_gap, gap_tol);
  const DistanceTable d(p);
  const std::vector<double> values = d.sorted_values();
  const std::vector<std::size_t> gaps = gap_indices(std::span<const double>(values));
  if (gaps.empty()) throw NoGapError("sorted projector distances have no gap index");

  const std::size_t budget = std::min(gap_budget(d.n()), gaps.size());
  std::vector<ClusterPartition> candidates;
  for (std::size_t t = 0; t < budget; ++t) {
    const std::size_t i = gaps[t];
    const double tau = values[i + 1];
    ClusterPartition cand = threshold_partition(d, tau);
    const double residual = decoupling_residual(t_x, cand, norm);
    result.trials.push_back({i, tau, cand.k(), residual, cand.k() == k});
    candidates.push_back(std::move(cand));
  }

  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    const GapTrial& trial = result.trials[t];
    if (!trial.eligible) continue;
    if (!result.selected_trial || trial.residual < result.trials[*result.selected_trial].residual) {
      result.selected_trial = t;
    }
  }
  if (!result.selected_trial) {
    throw NoGapError("none of the first " + std::to_string(budget) +
                     " gap indices yields a partition into " + std::to_string(k) + " blocks");
  }
  const std::size_t sel = *result.selected_trial;
  result.partition = candidates[sel];
  result.threshold_used = result.trials[sel].threshold;
  result.residual = result.trials[sel].residual;
  result.consistent = relation_is_equivalence(d, result.partition, result.threshold_used);
  return result;
}

ApproxClusterResult recover_one_approx(const Matrix& t_x, std::size_t k, double epsilon,
                                       Side side, double gap_tol) {
  require_recovery_input(t_x, k);
  const std::size_t n = static_cast<std::size_t>(t_x.rows());
  if (n % k != 0) throw ParameterError("approximate recovery needs equal cluster sizes (k | n)");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("epsilon must be finite and >= 0");
  }
  const double s = static_cast<double>(n / k);
  const Matrix p = recovery_projector(t_x, k, side, nullptr, gap_tol);
  const double cutoff = 1.0 / (2.0 * s);

  ApproxClusterResult best;
  best.size_cap = (1.0 + 8.0 * epsilon * epsilon) * s;
  best.admitted_size = static_cast<std::size_t>(std::floor(best.size_cap + 1e-9));
  bool found = false;
  for (std::size_t j = 0; j < n; ++j) {
    IndexSet cand;
    Vector mass = Vector::Zero(idx(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (p(idx(i), idx(j)) >= cutoff) {
        cand.push_back(i);
        mass += p.col(idx(i));
      }
    }
    if (cand.empty() || cand.size() > best.admitted_size) continue;
    const double score = mass.norm();
    if (!found || score > best.score) {
      found = true;
      best.selected_j = j;
      best.s_hat = std::move(cand);
      best.score = score;
    }
  }
  if (!found) {
    throw NoCandidateError("no candidate set has at most " + std::to_string(best.admitted_size) +
                           " elements");
  }
  return best;
}

KEstimate estimate_k(const Matrix& t_x, std::size_t k_max, NormChoice norm, double gap_tol) {
  const std::size_t n = static_cast<std::size_t>(t_x.rows());
  if (k_max < 2 || k_max >= n) throw ParameterError("estimate_k needs 2 <= k_max < n");
  KEstimate out;
  std::optional<RecoveryResult> best;
  double best_score = std::numeric_limits<double>::infinity();
  std::string failures;
  for (std::size_t k = 2; k <= k_max; ++k) {
    KTrial trial{k, std::nullopt, std::nullopt, std::nullopt, {}};
    try {
      RecoveryResult r = recover_empirical(t_x, k, norm, Side::right, gap_tol);
      trial.residual = r.residual;
      trial.spectral_gap = r.spectral_gap;
      trial.score = r.residual / r.spectral_gap;
      if (!best || *trial.score < best_score) {
        best_score = *trial.score;
        out.k = k;
        best = std::move(r);
      }
    } catch (const DegenerateGapError& e) {
      trial.error = e.what();
    } catch (const NoGapError& e) {
      trial.error = e.what();
    }
    if (!trial.error.empty()) {
      failures += (failures.empty() ? "" : "; ") + ("k = " + std::to_string(k) + ": " + trial.error);
    }
    out.trials.push_back(std::move(trial));
  }
  if (!best) throw NoGapError("no k in [2, " + std::to_string(k_max) + "] succeeded: " + failures);
  out.result = std::move(*best);
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

bool partition_match(const ClusterPartition& a, const ClusterPartition& b) {
  if (a.n() != b.n()) throw DimensionError("partitions of different index sets");
  return a.canonical() == b.canonical();
}

std::size_t intersection_size(const IndexSet& a, const IndexSet& b) {
  IndexSet common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return common.size();
}

std::size_t symmetric_difference_size(const IndexSet& a, const IndexSet& b) {
  return a.size() + b.size() - 2 * intersection_size(a, b);
}

std::pair<std::size_t, std::size_t> symdiff_min(const IndexSet& s_hat,
                                                const ClusterPartition& truth) {
  std::pair<std::size_t, std::size_t> best{0, std::numeric_limits<std::size_t>::max()};
  for (std::size_t b = 0; b < truth.k(); ++b) {
    const std::size_t diff = symmetric_difference_size(s_hat, truth.block(b));
    if (diff < best.second) best = {b, diff};
  }
  return best;
}

}  // namespace chainclust
