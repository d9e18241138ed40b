#include "chainclust/matrix_core.hpp"

#include "chainclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace chainclust {

namespace {

using Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Uniform on (0, 1] from the top 53 bits; mt19937_64 output is fully
// specified by the standard, so this is reproducible across toolchains.
double uniform_open_closed(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream};
  return std::mt19937_64(seq);
}

// One row of length `len` summing to 1, every entry >= floor.
void sample_row(std::mt19937_64& rng, std::span<double> row, double floor) {
  if (row.size() == 1) {
    row[0] = 1.0;
    return;
  }
  double total = 0.0;
  for (double& w : row) {
    w = uniform_open_closed(rng);
    total += w;
  }
  const double spread = 1.0 - floor * static_cast<double>(row.size());
  for (double& w : row) w = floor + spread * (w / total);
}

void reachable_from_zero(const Matrix& m, bool transpose, std::vector<char>& seen) {
  const std::size_t n = static_cast<std::size_t>(m.rows());
  seen.assign(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j) {
      const double w = transpose ? m(idx(j), idx(i)) : m(idx(i), idx(j));
      if (w > 0.0 && !seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ClusterPartition

ClusterPartition::ClusterPartition(std::size_t n, std::vector<IndexSet> blocks)
    : n_(n), blocks_(std::move(blocks)), labels_(n, n) {
  if (n == 0) throw DimensionError("partition of an empty index set");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    IndexSet& block = blocks_[b];
    if (block.empty()) throw DomainError("partition block " + std::to_string(b) + " is empty");
    std::sort(block.begin(), block.end());
    for (std::size_t j : block) {
      if (j >= n) {
        throw DomainError("partition index " + std::to_string(j) + " out of range for n = " +
                          std::to_string(n));
      }
      if (labels_[j] != n) {
        throw DomainError("partition index " + std::to_string(j) + " appears in two blocks");
      }
      labels_[j] = b;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (labels_[j] == n) {
      throw DomainError("partition does not cover index " + std::to_string(j));
    }
  }
}

ClusterPartition ClusterPartition::from_sizes(std::span<const std::size_t> sizes) {
  std::vector<IndexSet> blocks;
  std::size_t next = 0;
  for (std::size_t s : sizes) {
    if (s == 0) throw ParameterError("block sizes must be positive");
    IndexSet block(s);
    std::iota(block.begin(), block.end(), next);
    next += s;
    blocks.push_back(std::move(block));
  }
  return ClusterPartition(next, std::move(blocks));
}

ClusterPartition ClusterPartition::from_labels(std::span<const std::size_t> labels) {
  std::vector<std::size_t> ids(labels.begin(), labels.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<IndexSet> blocks(ids.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const auto pos = std::lower_bound(ids.begin(), ids.end(), labels[j]) - ids.begin();
    blocks[static_cast<std::size_t>(pos)].push_back(j);
  }
  return ClusterPartition(labels.size(), std::move(blocks)).canonical();
}

std::vector<std::size_t> ClusterPartition::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.size());
  return out;
}

std::vector<std::size_t> ClusterPartition::sizes_descending() const {
  auto out = sizes();
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

ClusterPartition ClusterPartition::canonical() const {
  std::vector<IndexSet> blocks = blocks_;
  std::sort(blocks.begin(), blocks.end(),
            [](const IndexSet& a, const IndexSet& b) { return a.front() < b.front(); });
  return ClusterPartition(n_, std::move(blocks));
}

// ---------------------------------------------------------------------------
// DecoupledChain / PerturbationInstance

DecoupledChain::DecoupledChain(Matrix matrix, ClusterPartition partition)
    : matrix_(std::move(matrix)), partition_(std::move(partition)) {
  const std::size_t n = partition_.n();
  if (static_cast<std::size_t>(matrix_.rows()) != n ||
      static_cast<std::size_t>(matrix_.cols()) != n) {
    throw DimensionError("chain matrix does not match partition size");
  }
  const ValidationReport report = validate_stochastic(matrix_, kGenerationTol);
  if (!report.ok()) throw DomainError("chain matrix is not stochastic: " + report.describe());
  const auto& labels = partition_.labels();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] != labels[j] && matrix_(idx(i), idx(j)) != 0.0) {
        throw DomainError("chain has a nonzero entry between blocks at (" + std::to_string(i) +
                          ", " + std::to_string(j) + ")");
      }
    }
  }
  for (std::size_t b = 0; b < partition_.k(); ++b) {
    if (!check_irreducible(block_matrix(b))) {
      throw DomainError("chain block " + std::to_string(b) + " is not irreducible");
    }
  }
}

Matrix DecoupledChain::block_matrix(std::size_t i) const {
  const IndexSet& block = partition_.block(i);
  const auto s = idx(block.size());
  Matrix out(s, s);
  for (Index a = 0; a < s; ++a) {
    for (Index b = 0; b < s; ++b) {
      out(a, b) = matrix_(idx(block[static_cast<std::size_t>(a)]),
                          idx(block[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

PerturbationInstance::PerturbationInstance(DecoupledChain base, Matrix e, double x_max)
    : base_(std::move(base)), e_(std::move(e)), x_max_(x_max) {
  if (e_.rows() != base_.matrix().rows() || e_.cols() != base_.matrix().cols()) {
    throw DimensionError("perturbation direction does not match the chain");
  }
  if (!(x_max_ > 0.0) || !std::isfinite(x_max_)) {
    throw ParameterError("x_max must be positive and finite");
  }
  if (!e_.allFinite()) throw DomainError("perturbation direction has non-finite entries");
  const Vector sums = e_.rowwise().sum();
  for (Index i = 0; i < sums.size(); ++i) {
    if (std::abs(sums(i)) > kGenerationTol) {
      throw DomainError("perturbation row " + std::to_string(i) + " sums to " +
                        std::to_string(sums(i)) + ", expected 0");
    }
  }
  const ValidationReport end = validate_stochastic(base_.matrix() + x_max_ * e_, kArithmeticTol);
  if (!end.ok()) throw DomainError("T(x_max) is not stochastic: " + end.describe());
}

// ---------------------------------------------------------------------------
// Validation

std::string Violation::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::negative_entry:
      os << "negative entry " << value << " at (" << row << ", " << col.value_or(0) << ")";
      break;
    case Kind::row_sum:
      os << "row " << row << " sums to " << value;
      break;
    case Kind::non_finite:
      os << "non-finite entry at (" << row << ", " << col.value_or(0) << ")";
      break;
  }
  return os.str();
}

std::string ValidationReport::describe() const {
  if (ok()) return "ok";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.describe();
  }
  return out;
}

ValidationReport validate_stochastic(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("stochastic check needs a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  ValidationReport report;
  for (Index i = 0; i < m.rows(); ++i) {
    bool finite = true;
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v)) {
        report.violations.push_back({Violation::Kind::non_finite, static_cast<std::size_t>(i),
                                     static_cast<std::size_t>(j), v});
        finite = false;
      } else if (v < -tol) {
        report.violations.push_back({Violation::Kind::negative_entry,
                                     static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                     v});
      }
    }
    if (!finite) continue;
    const double sum = m.row(i).sum();
    if (std::abs(sum - 1.0) > tol) {
      report.violations.push_back(
          {Violation::Kind::row_sum, static_cast<std::size_t>(i), std::nullopt, sum});
    }
  }
  return report;
}

bool check_irreducible(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("irreducibility needs a square matrix");
  if (m.rows() == 0) throw DimensionError("irreducibility of an empty matrix");
  if ((m.array() < 0.0).any()) throw DomainError("irreducibility check on negative entries");
  std::vector<char> seen;
  reachable_from_zero(m, false, seen);
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
  reachable_from_zero(m, true, seen);
  return std::find(seen.begin(), seen.end(), 0) == seen.end();
}

// ---------------------------------------------------------------------------
// Generators

DecoupledChain generate_decoupled(std::span<const std::size_t> sizes, std::uint64_t seed,
                                  double min_entry) {
  if (sizes.empty()) throw ParameterError("at least one block size is required");
  if (!(min_entry >= 0.0) || !std::isfinite(min_entry)) {
    throw ParameterError("min_entry must be a finite nonnegative number");
  }
  const std::size_t largest = *std::max_element(sizes.begin(), sizes.end());
  if (largest > 1 && min_entry * static_cast<double>(largest) >= 1.0) {
    throw ParameterError("min_entry must be below 1/max(sizes) for rows to normalize");
  }
  ClusterPartition partition = ClusterPartition::from_sizes(sizes);
  const std::size_t n = partition.n();

  auto rng = make_stream(seed, 0);
  Matrix t = Matrix::Zero(idx(n), idx(n));
  std::vector<double> row;
  for (const IndexSet& block : partition.blocks()) {
    row.resize(block.size());
    for (std::size_t i : block) {
      sample_row(rng, row, min_entry);
      for (std::size_t a = 0; a < block.size(); ++a) t(idx(i), idx(block[a])) = row[a];
    }
  }
  return DecoupledChain(std::move(t), std::move(partition));
}

PerturbationInstance generate_perturbation(const DecoupledChain& base, std::uint64_t seed) {
  const std::size_t n = base.n();
  const auto& labels = base.partition().labels();
  std::vector<double> row(n);
  for (std::uint32_t stream = 1;; ++stream) {
    auto rng = make_stream(seed, stream);
    Matrix q(idx(n), idx(n));
    for (std::size_t i = 0; i < n; ++i) {
      sample_row(rng, row, 0.0);
      for (std::size_t j = 0; j < n; ++j) q(idx(i), idx(j)) = row[j];
    }
    bool crosses = false;
    for (std::size_t i = 0; i < n && !crosses; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[i] != labels[j] && q(idx(i), idx(j)) > 0.0) {
          crosses = true;
          break;
        }
      }
    }
    // a single block has no cross-block support to find
    if (crosses || base.k() < 2) {
      Matrix e = q - base.matrix();
      return PerturbationInstance(base, std::move(e), 1.0);
    }
  }
}

Matrix transition_at(const PerturbationInstance& inst, double x) {
  if (!(x >= 0.0) || x > inst.x_max()) {
    throw ParameterError("x = " + std::to_string(x) + " outside [0, " +
                         std::to_string(inst.x_max()) + "]");
  }
  return inst.base().matrix() + x * inst.e();
}

}  // namespace chainclust
