#include <doctest.h>

#include <memory>
#include <random>

#include <Eigen/Dense>

#include "spinent/eigensolver.hpp"
#include "spinent/errors.hpp"
#include "spinent/models.hpp"

using namespace spinent;

namespace {

LinearOperator as_operator(const Eigen::MatrixXd& m) {
  return [&m](std::span<const double> in, std::span<double> out) {
    Eigen::Map<const Eigen::VectorXd> x(in.data(), in.size());
    Eigen::Map<Eigen::VectorXd> y(out.data(), out.size());
    y = m * x;
  };
}

Eigen::MatrixXd random_symmetric(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST_CASE("dense spectrum of a known matrix") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  const auto s = dense_spectrum(m);
  REQUIRE(s.size() == 2);
  CHECK(s.energies[0] == doctest::Approx(1.0));
  CHECK(s.energies[1] == doctest::Approx(3.0));
  CHECK(s.residuals[0] < 1e-12);
  // phase convention: largest entry positive
  CHECK(s.vectors[0][0] > 0.0);
}

TEST_CASE("dense spectrum rejects asymmetric input") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 0, 1;
  CHECK_THROWS_AS(dense_spectrum(m), InvalidInput);
}

TEST_CASE("lanczos matches dense on random matrices") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = random_symmetric(120, seed);
    const auto ref = dense_spectrum(m);
    const auto lz = lanczos_lowest_k(as_operator(m), 120, 5);
    REQUIRE(lz.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(lz.energies[k] == doctest::Approx(ref.energies[k]).epsilon(1e-10));
      CHECK(lz.residuals[k] < 1e-8);
    }
  }
}

TEST_CASE("lanczos resolves exact degeneracies") {
  Eigen::VectorXd d(50);
  for (int i = 0; i < 50; ++i) d(i) = i;
  d(1) = d(2) = d(3) = -1.0;  // threefold ground level
  const Eigen::MatrixXd m = d.asDiagonal();
  const auto lz = lanczos_lowest_k(as_operator(m), 50, 4);
  REQUIRE(lz.size() == 4);
  CHECK(lz.energies[0] == doctest::Approx(-1.0));
  CHECK(lz.energies[1] == doctest::Approx(-1.0));
  CHECK(lz.energies[2] == doctest::Approx(-1.0));
  CHECK(lz.energies[3] == doctest::Approx(0.0));
}

TEST_CASE("lanczos finds the Heisenberg triplet in the full basis") {
  auto b = std::make_shared<const SectorBasis>(LatticeSpec::chain(8), std::nullopt);
  const HamiltonianOperator h(ModelSpec::xxz(1.0), b);
  LinearOperator op = [&h](std::span<const double> in, std::span<double> out) { h.apply(in, out); };
  const auto lz = lanczos_lowest_k(op, b->dimension(), 4);
  CHECK(lz.energies[0] == doctest::Approx(-3.651093408937174).epsilon(1e-12));
  for (int k = 1; k < 4; ++k) CHECK(lz.energies[k] == doctest::Approx(-3.1284190638445795).epsilon(1e-12));
}

TEST_CASE("ritz values decrease monotonically") {
  const auto m = random_symmetric(200, 11);
  const auto hist = lanczos_ritz_history(as_operator(m), 200, 60);
  REQUIRE(hist.size() == 60);
  for (std::size_t k = 1; k < hist.size(); ++k) CHECK(hist[k] <= hist[k - 1] + 1e-12);
  CHECK(hist.back() >= dense_spectrum(m).energies[0] - 1e-9);
}

TEST_CASE("lanczos is deterministic for a fixed seed") {
  const auto m = random_symmetric(80, 5);
  LanczosOptions o;
  o.seed = 0xABCDEF;
  const auto a = lanczos_lowest_k(as_operator(m), 80, 3, o);
  const auto b = lanczos_lowest_k(as_operator(m), 80, 3, o);
  CHECK(a.energies == b.energies);
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("lanczos reports exhaustion") {
  const auto m = random_symmetric(300, 2);
  LanczosOptions o;
  o.max_iter = 5;
  CHECK_THROWS_AS(lanczos_lowest_k(as_operator(m), 300, 3, o), NumericError);
}

TEST_CASE("lanczos argument checks") {
  const auto m = random_symmetric(10, 2);
  CHECK_THROWS_AS(lanczos_lowest_k(as_operator(m), 10, 0), InvalidInput);
  CHECK_THROWS_AS(lanczos_lowest_k(as_operator(m), 10, 11), InvalidInput);
}

TEST_CASE("fix_phase") {
  std::vector<double> v{0.1, -0.9, 0.3};
  fix_phase(v);
  CHECK(v[1] == doctest::Approx(0.9));
  CHECK(v[0] == doctest::Approx(-0.1));
}
