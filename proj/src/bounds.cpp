#include "chainclust/bounds.hpp"

#include "chainclust/errors.hpp"
#include "chainclust/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace chainclust {

namespace {

using Eigen::Index;

bool is_symmetric(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

std::string list_values(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  for (Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  return os.str();
}

void check_hypothesis(const char* which, const Vector& abs_eigs, std::size_t k, double alpha,
                      double beta) {
  Vector sorted = abs_eigs;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const Index ks = static_cast<Index>(k);
  const Vector small = sorted.head(ks);
  const Vector large = sorted.tail(sorted.size() - ks);
  if (small.maxCoeff() > alpha || large.minCoeff() < beta) {
    throw HypothesisError(std::string("spectral hypothesis fails for ") + which +
                          ": k smallest |lambda| = [" + list_values(small) +
                          "], remaining |lambda| = [" + list_values(large) + "]");
  }
}

}  // namespace

EpsilonBound epsilon_bound(double x, double norm_e, double sigma_gap) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ParameterError("x must be finite and >= 0");
  if (!(norm_e > 0.0) || !std::isfinite(norm_e)) throw ParameterError("||E||_2 must be > 0");
  if (!(sigma_gap > 0.0) || !std::isfinite(sigma_gap)) {
    throw ParameterError("sigma_{n-k}(I - T_0) must be > 0");
  }
  const double spread = 2.0 * x * norm_e;
  if (spread >= sigma_gap) {
    std::ostringstream os;
    os.precision(17);
    os << "out of regime: 2 x ||E||_2 = " << spread << " >= sigma_{n-k}(I - T_0) = " << sigma_gap;
    throw OutOfRegimeError(os.str());
  }
  return {x, norm_e, sigma_gap, spread / (sigma_gap - spread)};
}

double x_for_epsilon(double epsilon, double norm_e, double sigma_gap) {
  if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be >= 0");
  return sigma_gap * epsilon / (2.0 * norm_e * (1.0 + epsilon));
}

BoundCertificate make_certificate(std::string name, double lhs, double rhs,
                                  CertificateContext context) {
  BoundCertificate cert;
  cert.name = std::move(name);
  cert.lhs = lhs;
  cert.rhs = rhs;
  cert.satisfied = lhs <= rhs + kCertificateSlack;
  cert.context = context;
  return cert;
}

double laplacian_sigma_gap(const Matrix& t, std::size_t k) {
  if (k >= static_cast<std::size_t>(t.rows())) throw ParameterError("k must be below n");
  return singular_values_ascending(laplacian(t))(static_cast<Index>(k));
}

InstanceConstants instance_constants(const PerturbationInstance& inst) {
  InstanceConstants c;
  c.n = inst.n();
  c.k = inst.k();
  c.sigma_gap = laplacian_sigma_gap(inst.base().matrix(), inst.k());
  c.norm_e = spectral_norm(inst.e());
  return c;
}

BoundCertificate validate_symmetric_projector_bound(const Matrix& a, const Matrix& b,
                                                    std::size_t k, double alpha, double beta,
                                                    CertificateContext context) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("projector bound needs matrices of equal shape");
  }
  if (!is_symmetric(a, 1e-10) || !is_symmetric(b, 1e-10)) {
    throw DomainError("projector bound needs symmetric matrices");
  }
  if (!(alpha > 0.0) || !(beta > alpha)) throw HypothesisError("need beta > alpha > 0");

  const SymmetricSplit sa = symmetric_split(a, k, 0.0);
  const SymmetricSplit sb = symmetric_split(b, k, 0.0);
  Vector abs_a(a.rows()), abs_b(b.rows());
  abs_a << sa.small_abs, sa.large_abs;
  abs_b << sb.small_abs, sb.large_abs;
  check_hypothesis("A", abs_a, k, alpha, beta);
  check_hypothesis("B", abs_b, k, alpha, beta);

  context.n = static_cast<std::size_t>(a.rows());
  context.k = k;
  const double lhs = spectral_norm(sa.projector - sb.projector);
  const double rhs = 2.0 * spectral_norm(a - b) / (beta - alpha);
  return make_certificate("symmetric_projector_bound", lhs, rhs, context);
}

std::vector<BoundCertificate> weyl_envelope(const PerturbationInstance& inst, double x,
                                            std::size_t k, std::uint64_t seed) {
  const Matrix tx = transition_at(inst, x);
  const Vector sigma = singular_values_ascending(laplacian(tx));
  const double sigma_gap = laplacian_sigma_gap(inst.base().matrix(), k);
  const double shift = x * spectral_norm(inst.e());
  const Index ks = static_cast<Index>(k);
  const CertificateContext ctx{inst.n(), k, x, seed};

  std::vector<BoundCertificate> out;
  out.push_back(make_certificate("weyl_small_sigma", sigma.head(ks).maxCoeff(), shift, ctx));
  out.push_back(make_certificate("weyl_large_sigma", sigma_gap - shift,
                                 sigma.tail(sigma.size() - ks).minCoeff(), ctx));
  return out;
}

ProjectorDeviation laplacian_projector_deviation(const PerturbationInstance& inst, double x) {
  const IdealProjectorPair ideal = ideal_projector(inst.base());
  const SpectralSplit split = spectral_split(laplacian(transition_at(inst, x)), inst.k());
  return {spectral_norm(split.p_left - ideal.p_left),
          spectral_norm(split.p_right - ideal.p_right)};
}

BoundCertificate validate_laplacian_projector_bound(const PerturbationInstance& inst, double x,
                                                    std::uint64_t seed) {
  const InstanceConstants c = instance_constants(inst);
  const EpsilonBound eps = epsilon_bound(x, c.norm_e, c.sigma_gap);
  const ProjectorDeviation dev = laplacian_projector_deviation(inst, x);
  return make_certificate("laplacian_projector_bound", std::max(dev.left, dev.right),
                          eps.epsilon, {inst.n(), inst.k(), x, seed});
}

double min_cross_distance(const ClusterPartition& partition) {
  if (partition.k() < 2) throw ParameterError("need at least two blocks");
  const auto sizes = partition.sizes_descending();
  return std::sqrt(1.0 / static_cast<double>(sizes[0]) + 1.0 / static_cast<double>(sizes[1]));
}

double exact_recovery_xmax(const ClusterPartition& partition, double sigma_gap, double norm_e) {
  if (partition.k() < 2) throw ParameterError("exact recovery threshold needs k >= 2");
  if (!(sigma_gap > 0.0) || !(norm_e > 0.0)) {
    throw ParameterError("sigma_gap and norm_e must be positive");
  }
  const double c = 0.25 * min_cross_distance(partition);
  return sigma_gap * c / (2.0 * norm_e * (1.0 + c));
}

SymmetricPair generate_symmetric_pair(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k >= n) throw ParameterError("symmetric pair needs 1 <= k < n");
  const Index ns = static_cast<Index>(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;

  for (;;) {
    Matrix g(ns, ns);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();

    Vector lambda(ns);
    for (Index i = 0; i < ns; ++i) {
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      const bool small = i < static_cast<Index>(k);
      lambda(i) = sign * (small ? 0.01 + 0.49 * unit(rng) : 1.0 + 2.0 * unit(rng));
    }
    SymmetricPair pair;
    pair.k = k;
    pair.a = q * lambda.asDiagonal() * q.transpose();
    pair.a = (0.5 * (pair.a + pair.a.transpose())).eval();

    Matrix h(ns, ns);
    for (Index i = 0; i < h.size(); ++i) h.data()[i] = gauss(rng);
    h = (0.5 * (h + h.transpose())).eval();
    h *= (0.2 * unit(rng)) / spectral_norm(h);
    pair.b = pair.a + h;

    const SymmetricSplit sa = symmetric_split(pair.a, k, 0.0);
    const SymmetricSplit sb = symmetric_split(pair.b, k, 0.0);
    pair.alpha = std::max(sa.small_abs.maxCoeff(), sb.small_abs.maxCoeff());
    pair.beta = std::min(sa.large_abs.minCoeff(), sb.large_abs.minCoeff());
    if (pair.alpha > 0.0 && pair.beta > pair.alpha) return pair;
  }
}

}  // namespace chainclust
