// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every tolerance below is fixed; nothing is calibrated at run time.

#include "chainclust/bounds.hpp"
#include "chainclust/errors.hpp"
#include "chainclust/experiment.hpp"
#include "chainclust/io.hpp"
#include "chainclust/matrix_core.hpp"
#include "chainclust/recovery.hpp"
#include "chainclust/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace chainclust;
namespace ex = chainclust::experiment;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Seeded campaign instance: k in {2,3,4}, block sizes in [2, 15] (n <= 60).
ex::Instance campaign_instance(std::uint64_t index, bool equal_sizes) {
  std::mt19937_64 rng(0xACCE5500ULL + index * 7919ULL + (equal_sizes ? 1ULL << 40 : 0ULL));
  const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
  std::vector<std::size_t> sizes(k);
  if (equal_sizes) {
    std::fill(sizes.begin(), sizes.end(), std::uniform_int_distribution<std::size_t>(2, 15)(rng));
  } else {
    for (auto& s : sizes) s = std::uniform_int_distribution<std::size_t>(2, 15)(rng);
  }
  return ex::make_instance(sizes, rng());
}

// 20 points on [0, top].
std::vector<double> grid20(double top) {
  std::vector<double> xs;
  for (int j = 0; j < 20; ++j) xs.push_back(top * j / 19.0);
  return xs;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a;
}

// ---------------------------------------------------------------------------

Outcome ac1_symmetrization() {
  Outcome o;
  std::mt19937_64 rng(101);
  double worst_eig = 0.0, worst_norm = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 30)(rng);
    const Matrix a = random_matrix(rng, n);
    const Matrix s = symmetrize(a);

    // +-sigma(A) from an SVD of A, against the eigenvalues of S(A)
    Eigen::JacobiSVD<Matrix> svd(a);
    std::vector<double> expected;
    for (Eigen::Index i = 0; i < n; ++i) {
      expected.push_back(svd.singularValues()(i));
      expected.push_back(-svd.singularValues()(i));
    }
    std::sort(expected.begin(), expected.end());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
      worst_eig = std::max(worst_eig, std::abs(eig.eigenvalues()(i) - expected[i]));
    }
    const double norm_s = eig.eigenvalues().cwiseAbs().maxCoeff();
    worst_norm = std::max(worst_norm, std::abs(norm_s - svd.singularValues()(0)));
  }
  o.pass = worst_eig <= 1e-9 && worst_norm <= 1e-10;
  o.detail = "max eigenvalue error " + io::format_double(worst_eig) + ", max norm error " +
             io::format_double(worst_norm);
  return o;
}

Outcome ac2_projector_direct_sum() {
  Outcome o;
  std::mt19937_64 rng(202);
  int done = 0;
  double worst = 0.0;
  while (done < 100) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(2, 20)(rng);
    const auto k = std::uniform_int_distribution<std::size_t>(1, static_cast<std::size_t>(n) - 1)(rng);
    const Matrix a = random_matrix(rng, n);
    SpectralSplit split;
    try {
      split = spectral_split(a, k, 1e-6);
    } catch (const DegenerateGapError&) {
      continue;
    }
    // eigenprojector of S(A) onto its 2k smallest |lambda|
    const Matrix s = symmetrize(a);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(2 * n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
      return std::abs(eig.eigenvalues()(x)) < std::abs(eig.eigenvalues()(y));
    });
    Matrix basis(2 * n, static_cast<Eigen::Index>(2 * k));
    for (std::size_t i = 0; i < 2 * k; ++i) {
      basis.col(static_cast<Eigen::Index>(i)) = eig.eigenvectors().col(order[i]);
    }
    const Matrix p2k = basis * basis.transpose();
    const Matrix blocks = direct_sum(split.p_left, split.p_right);
    worst = std::max(worst, (p2k - blocks).cwiseAbs().maxCoeff());
    ++done;
  }
  o.pass = worst <= 1e-8;
  o.detail = "100 instances, max blockwise deviation " + io::format_double(worst);
  return o;
}

Outcome ac3_symmetric_projector_campaign() {
  Outcome o;
  std::mt19937_64 rng(303);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto n = std::uniform_int_distribution<std::size_t>(2, 20)(rng);
    const auto k = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
    const SymmetricPair pair = generate_symmetric_pair(n, k, rng());
    // hypothesis re-checked independently from full spectra
    auto check = [&](const Matrix& m) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
      std::vector<double> mags;
      for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        mags.push_back(std::abs(eig.eigenvalues()(i)));
      }
      std::sort(mags.begin(), mags.end());
      return mags[k - 1] <= pair.alpha && mags[k] >= pair.beta;
    };
    if (!check(pair.a) || !check(pair.b) || !(pair.beta > pair.alpha && pair.alpha > 0.0)) {
      o.pass = false;
      o.detail = "generated pair violates the hypothesis";
      return o;
    }
    const auto cert = validate_symmetric_projector_bound(pair.a, pair.b, k, pair.alpha, pair.beta);
    if (!(cert.lhs <= cert.rhs + 1e-10)) ++violations;
    if (cert.rhs > 0) worst_ratio = std::max(worst_ratio, cert.lhs / cert.rhs);
  }
  o.pass = violations == 0;
  o.detail = "500 pairs, " + std::to_string(violations) + " violations, max lhs/rhs " +
             io::format_double(worst_ratio);
  return o;
}

Outcome ac4_laplacian_and_weyl_campaign() {
  Outcome o;
  int points = 0, violations = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const ex::Instance inst = campaign_instance(i, false);
    const auto& p = inst.perturbation;
    for (double x : grid20(0.999 * inst.constants.regime_limit())) {
      ++points;
      const auto cert = validate_laplacian_projector_bound(p, x, inst.seed);
      if (!(cert.lhs <= cert.rhs + 1e-10)) ++violations;
      if (cert.rhs > 0) worst_ratio = std::max(worst_ratio, cert.lhs / cert.rhs);
      for (const auto& w : weyl_envelope(p, x, p.k(), inst.seed)) {
        if (!(w.lhs <= w.rhs + 1e-10)) ++violations;
      }
    }
  }
  o.pass = violations == 0;
  o.detail = std::to_string(points) + " points, " + std::to_string(violations) +
             " violations, max deviation/epsilon " + io::format_double(worst_ratio);
  return o;
}

// Shared campaign for criteria 5-7 and 9: x below 0.95 x*.
struct RecoveryPoint {
  ex::Instance inst;
  double x;
  double eps;
};

std::vector<RecoveryPoint> recovery_points() {
  std::vector<RecoveryPoint> out;
  for (std::uint64_t i = 0; i < 200; ++i) {
    ex::Instance inst = campaign_instance(i, false);
    for (double x : grid20(0.95 * *inst.x_star)) {
      const double eps = epsilon_bound(x, inst.constants.norm_e, inst.constants.sigma_gap).epsilon;
      out.push_back({inst, x, eps});
    }
  }
  return out;
}

double ideal_cross_distance(const ClusterPartition& truth, std::size_t i, std::size_t j) {
  const double a = static_cast<double>(truth.block(truth.block_of(i)).size());
  const double b = static_cast<double>(truth.block(truth.block_of(j)).size());
  return std::sqrt(1.0 / a + 1.0 / b);
}

Outcome ac5_dichotomy(const std::vector<RecoveryPoint>& pts) {
  Outcome o;
  std::size_t checked = 0, bad = 0, bad_zero = 0;
  for (const auto& pt : pts) {
    const auto& truth = pt.inst.perturbation.base().partition();
    const double c = 0.25 * min_cross_distance(truth);
    if (!(pt.eps < c)) continue;
    const Matrix tx = transition_at(pt.inst.perturbation, pt.x);
    const DistanceTable d(recovery_projector(tx, truth.k(), Side::right));
    ++checked;
    for (const auto& e : d.entries()) {
      const bool same = truth.block_of(e.i) == truth.block_of(e.j);
      const double ideal = same ? 0.0 : ideal_cross_distance(truth, e.i, e.j);
      if (same && e.distance > 2 * pt.eps + 1e-9) ++bad;
      if (!same && e.distance < ideal - 2 * pt.eps - 1e-9) ++bad;
      if (pt.x == 0.0 && std::abs(e.distance - ideal) > 1e-10) ++bad_zero;
    }
  }
  o.pass = bad == 0 && bad_zero == 0 && checked >= 200;
  o.detail = std::to_string(checked) + " in-regime points, " + std::to_string(bad) +
             " dichotomy violations, " + std::to_string(bad_zero) + " x = 0 deviations > 1e-10";
  return o;
}

struct ModePartitions {
  std::optional<ClusterPartition> oracle, known, empirical;
};

ModePartitions run_modes(const RecoveryPoint& pt, Side side, std::size_t* tried = nullptr,
                         bool* budget_ok = nullptr) {
  const auto& truth = pt.inst.perturbation.base().partition();
  const auto sizes = truth.sizes_descending();
  const Matrix tx = transition_at(pt.inst.perturbation, pt.x);
  ModePartitions out;
  out.oracle = recover_exact(tx, truth.k(), OracleEpsilon{pt.eps}, side).partition;
  out.known = recover_exact(tx, truth.k(), KnownSizes{sizes[0], sizes[1]}, side).partition;
  const double c = min_cross_distance(truth);
  if (4 * pt.eps < c - 2 * pt.eps) {
    try {
      const auto r = recover_empirical(tx, truth.k(), NormChoice::frobenius, side);
      out.empirical = r.partition;
      if (tried) *tried = r.trials.size();
      if (budget_ok) *budget_ok = r.trials.size() <= gap_budget(truth.n());
    } catch (const Error&) {
      if (budget_ok) *budget_ok = false;
    }
  }
  return out;
}

Outcome ac6_exact_recovery(const std::vector<RecoveryPoint>& pts) {
  Outcome o;
  std::size_t checked = 0, oracle_fail = 0, known_disagree = 0;
  for (const auto& pt : pts) {
    const auto& truth = pt.inst.perturbation.base().partition();
    if (!(pt.eps < 0.25 * min_cross_distance(truth))) continue;
    ++checked;
    const ModePartitions m = run_modes(pt, Side::right);
    if (!partition_match(*m.oracle, truth)) ++oracle_fail;
    if (!partition_match(*m.known, *m.oracle)) ++known_disagree;
  }
  o.pass = checked >= 200 && oracle_fail == 0 && known_disagree == 0;
  o.detail = std::to_string(checked) + " in-regime points, " + std::to_string(oracle_fail) +
             " oracle failures, " + std::to_string(known_disagree) + " known-sizes disagreements";
  return o;
}

Outcome ac7_empirical_threshold(const std::vector<RecoveryPoint>& pts) {
  Outcome o;
  std::size_t checked = 0, disagree = 0, over_budget = 0;
  for (const auto& pt : pts) {
    const auto& truth = pt.inst.perturbation.base().partition();
    const double c = min_cross_distance(truth);
    if (!(4 * pt.eps < c - 2 * pt.eps)) continue;
    ++checked;
    bool budget_ok = true;
    const ModePartitions m = run_modes(pt, Side::right, nullptr, &budget_ok);
    if (!m.empirical || !partition_match(*m.empirical, *m.oracle)) ++disagree;
    if (!budget_ok) ++over_budget;
  }
  o.pass = checked > 0 && disagree == 0 && over_budget == 0;
  o.detail = std::to_string(checked) + " points, " + std::to_string(disagree) +
             " disagreements with oracle mode, " + std::to_string(over_budget) + " over budget";
  return o;
}

Outcome ac8_approx_one() {
  Outcome o;
  std::size_t checked = 0, bad = 0, bad_zero = 0, no_candidate = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const ex::Instance inst = campaign_instance(i, true);
    const auto& p = inst.perturbation;
    const auto& truth = p.base().partition();
    const double s = static_cast<double>(truth.block(0).size());
    for (double x : grid20(0.999 * inst.constants.regime_limit())) {
      const double eps = epsilon_bound(x, inst.constants.norm_e, inst.constants.sigma_gap).epsilon;
      const Matrix tx = transition_at(p, x);
      ++checked;
      ApproxClusterResult r;
      try {
        r = recover_one_approx(tx, truth.k(), eps);
      } catch (const NoCandidateError&) {
        ++no_candidate;
        continue;
      }
      const IndexSet& block = truth.block(truth.block_of(r.selected_j));
      const double symdiff = static_cast<double>(symmetric_difference_size(block, r.s_hat));
      const double common = static_cast<double>(intersection_size(block, r.s_hat));
      if (symdiff > std::ceil(4 * eps * s) || common < (1 - 3 * eps) * s - 1) ++bad;
      if (x == 0.0 && symdiff != 0.0) ++bad_zero;
    }
  }
  o.pass = bad == 0 && bad_zero == 0 && no_candidate == 0;
  o.detail = std::to_string(checked) + " points, " + std::to_string(bad) + " guarantee violations, " +
             std::to_string(bad_zero) + " nonzero at x = 0, " + std::to_string(no_candidate) +
             " without candidate";
  return o;
}

Outcome ac9_left_right(const std::vector<RecoveryPoint>& pts) {
  Outcome o;
  std::size_t checked = 0, oracle_diff = 0, known_diff = 0, emp_diff = 0;
  for (const auto& pt : pts) {
    const auto& truth = pt.inst.perturbation.base().partition();
    if (!(pt.eps < 0.25 * min_cross_distance(truth))) continue;
    ++checked;
    const ModePartitions right = run_modes(pt, Side::right);
    ModePartitions left;
    try {
      left = run_modes(pt, Side::left);
    } catch (const Error&) {
    }
    if (!left.oracle || !partition_match(*left.oracle, *right.oracle)) ++oracle_diff;
    if (!left.known || !partition_match(*left.known, *right.known)) ++known_diff;
    if (right.empirical.has_value() != left.empirical.has_value() ||
        (right.empirical && !partition_match(*left.empirical, *right.empirical))) {
      ++emp_diff;
    }
  }
  o.pass = checked > 0 && oracle_diff == 0 && known_diff == 0 && emp_diff == 0;
  o.detail = std::to_string(checked) + " points; left/right mismatches: oracle " +
             std::to_string(oracle_diff) + ", known-sizes " + std::to_string(known_diff) +
             ", empirical " + std::to_string(emp_diff);
  return o;
}

bool files_equal(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

Outcome ac10_determinism_io() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "chainclust_acceptance";
  std::filesystem::remove_all(dir);
  std::vector<std::string> failures;

  for (const std::string ext : {"mtx", "csv"}) {
    const ex::Instance inst = ex::make_instance({3, 2}, 7);
    const auto files = ex::write_instance_files(inst, dir / ext, ext, 0.05);
    const Matrix t0 = io::read_matrix(files.t0);
    const Matrix e = io::read_matrix(files.e);
    const Matrix tx = io::read_matrix(*files.tx);
    if (!(t0.array() == inst.perturbation.base().matrix().array()).all()) {
      failures.push_back(ext + " T0 not bit-exact");
    }
    if (!(e.array() == inst.perturbation.e().array()).all()) failures.push_back(ext + " E not bit-exact");
    if (!(tx.array() == transition_at(inst.perturbation, 0.05).array()).all()) {
      failures.push_back(ext + " Tx not bit-exact");
    }
    if (!(io::read_partition(files.partition) == inst.perturbation.base().partition())) {
      failures.push_back(ext + " partition differs");
    }
    const ex::Instance again = ex::make_instance({3, 2}, 7);
    const auto files2 = ex::write_instance_files(again, dir / (ext + "_again"), ext);
    if (!files_equal(files.t0, files2.t0) || !files_equal(files.e, files2.e)) {
      failures.push_back(ext + " regeneration not byte-identical");
    }
  }

  std::istringstream cfg(
      "sizes = 4,4\nseed = 5\nx_grid = 0:0.2:9\n"
      "modes = oracle_epsilon, known_sizes, empirical, approx_one\ntimestamp = false\n");
  const ex::ExperimentConfig config = ex::parse_config(cfg);
  std::ostringstream first, second;
  ex::write_sweep(first, ex::run_sweep(config), ex::OutputFormat::csv, config.timestamp);
  ex::write_sweep(second, ex::run_sweep(config), ex::OutputFormat::csv, config.timestamp);
  if (first.str() != second.str()) failures.push_back("sweep CSV differs between runs");

  std::filesystem::remove_all(dir);
  o.pass = failures.empty();
  o.detail = failures.empty() ? "matrices, partition and sweep CSV reproduce exactly"
                              : failures.front();
  return o;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](const char* id, const char* title, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };

  report("AC1", "symmetrization spectrum", ac1_symmetrization);
  report("AC2", "projector direct sum", ac2_projector_direct_sum);
  report("AC3", "symmetric projector bound campaign", ac3_symmetric_projector_campaign);
  report("AC4", "Laplacian projector bound and Weyl envelope", ac4_laplacian_and_weyl_campaign);
  const std::vector<RecoveryPoint> pts = recovery_points();
  report("AC5", "same/cross distance dichotomy", [&] { return ac5_dichotomy(pts); });
  report("AC6", "exact recovery (oracle and known sizes)", [&] { return ac6_exact_recovery(pts); });
  report("AC7", "empirical threshold", [&] { return ac7_empirical_threshold(pts); });
  report("AC8", "approximate one-cluster recovery", ac8_approx_one);
  report("AC9", "left/right projector interchangeability", [&] { return ac9_left_right(pts); });
  report("AC10", "determinism and file round trip", ac10_determinism_io);

  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
