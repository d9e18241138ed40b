#include "chainclust/errors.hpp"
#include "chainclust/matrix_core.hpp"
#include "chainclust/spectral.hpp"

#include <doctest.h>

#include <random>

using namespace chainclust;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a;
}

// Largest singular value as sqrt of the top eigenvalue of A^T A.
double norm_via_gram(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a, Eigen::EigenvaluesOnly);
  return std::sqrt(eig.eigenvalues().maxCoeff());
}

}  // namespace

TEST_CASE("symmetrize examples") {
  const Matrix z = Matrix::Zero(1, 1);
  CHECK(symmetrize(z).isZero(0.0));
  CHECK(symmetrize(z).rows() == 2);

  Matrix a(2, 2);
  a << 0, 2, 0, 0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a), Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues()(0) == doctest::Approx(-2.0));
  CHECK(eig.eigenvalues()(1) == doctest::Approx(0.0));
  CHECK(eig.eigenvalues()(2) == doctest::Approx(0.0));
  CHECK(eig.eigenvalues()(3) == doctest::Approx(2.0));

  std::mt19937_64 rng(3);
  const Matrix r = random_matrix(rng, 4);
  const Matrix s = symmetrize(r);
  CHECK((s - s.transpose()).isZero(0.0));
  CHECK(std::abs(spectral_norm(s) - norm_via_gram(r)) <= 1e-10);
}

TEST_CASE("singular values ascending match the Gram spectrum") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_matrix(rng, 2 + t % 7);
    const Vector sv = singular_values_ascending(a);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      CHECK(sv(i) * sv(i) == doctest::Approx(std::max(0.0, eig.eigenvalues()(i))).epsilon(1e-8));
      if (i > 0) CHECK(sv(i) >= sv(i - 1));
    }
  }
}

TEST_CASE("spectral_split examples") {
  CHECK_THROWS_AS(spectral_split(Matrix::Zero(3, 3), 1), DegenerateGapError);

  Vector d(3);
  d << 3, 2, 0.1;
  const SpectralSplit s = spectral_split(Matrix(d.asDiagonal()), 1);
  CHECK(s.small_sigmas.size() == 1);
  CHECK(s.small_sigmas(0) == doctest::Approx(0.1));
  Matrix e3 = Matrix::Zero(3, 3);
  e3(2, 2) = 1.0;
  CHECK((s.p_right - e3).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((s.p_left - e3).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s.gap == doctest::Approx(1.9));

  CHECK_THROWS_AS(spectral_split(identity(3), 0), ParameterError);
  CHECK_THROWS_AS(spectral_split(identity(3), 3), ParameterError);
  CHECK_THROWS_AS(spectral_split(Matrix::Zero(2, 3), 1), DimensionError);
}

TEST_CASE("spectral_split degenerate gap reports the tied values") {
  try {
    spectral_split(identity(4), 2);
    FAIL("expected DegenerateGapError");
  } catch (const DegenerateGapError& e) {
    CHECK(e.upper_small() == doctest::Approx(1.0));
    CHECK(e.lower_large() == doctest::Approx(1.0));
  }
}

TEST_CASE("spectral_split projectors are symmetric idempotents of trace k") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index n = 2 + t % 9;
    const std::size_t k = 1 + static_cast<std::size_t>(t) % static_cast<std::size_t>(n - 1);
    const Matrix a = random_matrix(rng, n);
    const SpectralSplit s = spectral_split(a, k, 0.0);
    for (const Matrix* p : {&s.p_left, &s.p_right}) {
      CHECK(((*p) * (*p) - *p).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK((*p - p->transpose()).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(std::abs(p->trace() - static_cast<double>(k)) <= 1e-8);
    }
    // A maps the right subspace onto the left one: P^L A P^R = A P^R.
    CHECK((s.p_left * a * s.p_right - a * s.p_right).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("ideal projector examples") {
  Matrix t(4, 4);
  t << 0.5, 0.5, 0, 0,  //
      0.5, 0.5, 0, 0,   //
      0, 0, 0.5, 0.5,   //
      0, 0, 0.5, 0.5;
  const std::vector<std::size_t> sizes{2, 2};
  const DecoupledChain chain(t, ClusterPartition::from_sizes(sizes));
  const IdealProjectorPair ideal = ideal_projector(chain);
  CHECK((ideal.p_right - 0.5 * (t.array() > 0).cast<double>().matrix()).cwiseAbs().maxCoeff() <=
        1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(ideal.stationary[0](0) == doctest::Approx(r));
  CHECK(ideal.stationary[0](1) == doctest::Approx(r));
}

TEST_CASE("ideal projector matches the split of the Laplacian") {
  const std::vector<std::size_t> sizes{2, 2};
  const auto chain = generate_decoupled(sizes, 21);
  const auto ideal = ideal_projector(chain);
  const SpectralSplit s = spectral_split(laplacian(chain.matrix()), 2);
  CHECK((s.p_right - ideal.p_right).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((s.p_left - ideal.p_left).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("left Perron vectors annihilate the Laplacian from the left") {
  const std::vector<std::size_t> sizes{3, 2};
  const auto chain = generate_decoupled(sizes, 13);
  const auto ideal = ideal_projector(chain);
  const Matrix residual = laplacian(chain.matrix()).transpose() * ideal.p_left;
  CHECK(residual.colwise().norm().maxCoeff() <= 1e-8);
  for (const Vector& u : ideal.stationary) {
    CHECK(u.minCoeff() > 0.0);
    CHECK(u.norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("power-iteration fallback agrees with the direct solve") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::vector<std::size_t> sizes{2 + seed % 5};
    const auto chain = generate_decoupled(sizes, seed);
    const Vector direct = left_perron_vector(chain.matrix());
    const Vector power = left_perron_vector_power(chain.matrix());
    CHECK((direct - power).cwiseAbs().maxCoeff() <= 1e-9);
  }
  Matrix cycle(3, 3);
  cycle << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  const Vector u = left_perron_vector_power(cycle);
  CHECK((u.array() - 1.0 / std::sqrt(3.0)).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("symmetric_split sorts by absolute eigenvalue") {
  Vector d(3);
  d << -0.1, 4, -2;
  const SymmetricSplit s = symmetric_split(Matrix(d.asDiagonal()), 1);
  CHECK(s.small_abs(0) == doctest::Approx(0.1));
  CHECK(s.large_abs(0) == doctest::Approx(2.0));
  CHECK(s.projector(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(s.projector.trace() - 1.0) <= 1e-12);
}
