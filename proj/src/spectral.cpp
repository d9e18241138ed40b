#include "chainclust/spectral.hpp"

#include "chainclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace chainclust {

namespace {

using Eigen::Index;

// Positions of `values` in stable ascending order.
std::vector<Index> ascending_order(const Vector& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values(a) < values(b); });
  return order;
}

[[noreturn]] void throw_degenerate(const char* what, double small, double large, double tol) {
  std::ostringstream os;
  os.precision(17);
  os << what << ": k-th smallest value " << small << " and next value " << large
     << " differ by less than " << tol;
  throw DegenerateGapError(os.str(), small, large);
}

}  // namespace

Vector singular_values_ascending(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  Vector s = svd.singularValues();
  std::sort(s.data(), s.data() + s.size());
  return s;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

SpectralSplit spectral_split(const Matrix& m, std::size_t k, double gap_tol) {
  if (m.rows() != m.cols()) throw DimensionError("spectral split needs a square matrix");
  const std::size_t n = static_cast<std::size_t>(m.rows());
  if (k < 1 || k >= n) {
    throw ParameterError("spectral split needs 1 <= k < n, got k = " + std::to_string(k) +
                         ", n = " + std::to_string(n));
  }
  if (!m.allFinite()) throw DomainError("spectral split of a matrix with non-finite entries");

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  const auto order = ascending_order(sigma);

  const Index ks = static_cast<Index>(k);
  const Index rest = static_cast<Index>(n) - ks;
  SpectralSplit split;
  split.k = k;
  split.small_sigmas.resize(ks);
  split.large_sigmas.resize(rest);
  split.u_k.resize(m.rows(), ks);
  split.v_k.resize(m.rows(), ks);
  for (Index i = 0; i < ks; ++i) {
    const Index c = order[static_cast<std::size_t>(i)];
    split.small_sigmas(i) = sigma(c);
    split.u_k.col(i) = svd.matrixU().col(c);
    split.v_k.col(i) = svd.matrixV().col(c);
  }
  for (Index i = 0; i < rest; ++i) {
    split.large_sigmas(i) = sigma(order[static_cast<std::size_t>(ks + i)]);
  }
  split.gap = split.large_sigmas(0) - split.small_sigmas(ks - 1);
  if (split.gap < gap_tol) {
    throw_degenerate("degenerate singular subspace", split.small_sigmas(ks - 1),
                     split.large_sigmas(0), gap_tol);
  }
  split.p_left = projector_from_basis(split.u_k);
  split.p_right = projector_from_basis(split.v_k);
  return split;
}

SymmetricSplit symmetric_split(const Matrix& a, std::size_t k, double gap_tol) {
  if (a.rows() != a.cols()) throw DimensionError("symmetric split needs a square matrix");
  const std::size_t n = static_cast<std::size_t>(a.rows());
  if (k < 1 || k >= n) throw ParameterError("symmetric split needs 1 <= k < n");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  if (eig.info() != Eigen::Success) throw DomainError("symmetric eigensolver failed");
  const Vector magnitude = eig.eigenvalues().cwiseAbs();
  const auto order = ascending_order(magnitude);

  const Index ks = static_cast<Index>(k);
  const Index rest = static_cast<Index>(n) - ks;
  SymmetricSplit split;
  split.k = k;
  split.small_abs.resize(ks);
  split.large_abs.resize(rest);
  Matrix basis(a.rows(), ks);
  for (Index i = 0; i < ks; ++i) {
    const Index c = order[static_cast<std::size_t>(i)];
    split.small_abs(i) = magnitude(c);
    basis.col(i) = eig.eigenvectors().col(c);
  }
  for (Index i = 0; i < rest; ++i) {
    split.large_abs(i) = magnitude(order[static_cast<std::size_t>(ks + i)]);
  }
  split.gap = split.large_abs(0) - split.small_abs(ks - 1);
  if (split.gap < gap_tol) {
    throw_degenerate("degenerate eigenspace", split.small_abs(ks - 1), split.large_abs(0),
                     gap_tol);
  }
  split.projector = projector_from_basis(basis);
  return split;
}

Vector left_perron_vector_power(const Matrix& block, double tol) {
  const Index s = block.rows();
  const Matrix lazy = 0.5 * (Matrix::Identity(s, s) + block);
  Vector pi = Vector::Constant(s, 1.0 / static_cast<double>(s));
  for (int it = 0; it < 10'000'000; ++it) {
    Vector next = lazy.transpose() * pi;
    next /= next.sum();
    const double change = (next - pi).cwiseAbs().maxCoeff();
    pi = std::move(next);
    if (change < tol) break;
  }
  return pi / pi.norm();
}

Vector left_perron_vector(const Matrix& block) {
  const Index s = block.rows();
  if (s == 1) return Vector::Ones(1);
  Matrix system = block.transpose() - Matrix::Identity(s, s);
  system.row(s - 1).setOnes();
  Vector rhs = Vector::Zero(s);
  rhs(s - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(system);
  if (lu.isInvertible()) {
    Vector pi = lu.solve(rhs);
    if (pi.allFinite() && (pi.array() > 0.0).all()) return pi / pi.norm();
  }
  return left_perron_vector_power(block);
}

IdealProjectorPair ideal_projector(const DecoupledChain& chain) {
  const Index n = static_cast<Index>(chain.n());
  IdealProjectorPair out;
  out.p_left = Matrix::Zero(n, n);
  out.p_right = Matrix::Zero(n, n);
  const auto& blocks = chain.partition().blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const IndexSet& block = blocks[b];
    const Matrix tb = chain.block_matrix(b);
    if (!check_irreducible(tb)) {
      throw DomainError("block " + std::to_string(b) + " is not irreducible");
    }
    const Vector u = left_perron_vector(tb);
    const double inv = 1.0 / static_cast<double>(block.size());
    for (std::size_t a = 0; a < block.size(); ++a) {
      for (std::size_t c = 0; c < block.size(); ++c) {
        const Index i = static_cast<Index>(block[a]);
        const Index j = static_cast<Index>(block[c]);
        out.p_right(i, j) = inv;
        out.p_left(i, j) = u(static_cast<Index>(a)) * u(static_cast<Index>(c));
      }
    }
    out.stationary.push_back(u);
  }
  return out;
}

}  // namespace chainclust
