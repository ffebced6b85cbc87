#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "gradfeat/core/linalg.hpp"
#include "gradfeat/core/rng.hpp"
#include "gradfeat/core/tensor.hpp"

using namespace gradfeat;

TEST_CASE("eigendecomposition of a diagonal matrix", "[linalg]") {
  Tensor a({3, 3});
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  const SymEig e = sym_eig(a);
  REQUIRE(e.eigenvalues[0] == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(e.eigenvalues[1] == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(e.eigenvalues[2] == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("2x2 eigenvalues match the closed form", "[linalg]") {
  Tensor a({2, 2}, {2.0, 1.0, 1.0, 2.0});
  const SymEig e = sym_eig(a);
  REQUIRE(e.eigenvalues[0] == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(e.eigenvalues[1] == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("random symmetric matrix reconstructs from its factors", "[linalg]") {
  SeededRng rng(17);
  const std::size_t d = 8;
  Tensor b = sample_gaussian(rng, {d, d});
  Tensor a({d, d});
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) a(i, j) = 0.5 * (b(i, j) + b(j, i));
  }
  const SymEig e = sym_eig(a);

  for (std::size_t k = 0; k + 1 < d; ++k) {
    REQUIRE(e.eigenvalues[k] <= e.eigenvalues[k + 1]);
  }

  // columns orthonormal
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        acc += e.eigenvectors(k, i) * e.eigenvectors(k, j);
      }
      REQUIRE(acc == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-10));
    }
  }

  // A == V diag(s) V^T
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        acc += e.eigenvectors(i, k) * e.eigenvalues[k] * e.eigenvectors(j, k);
      }
      REQUIRE(acc == Catch::Approx(a(i, j)).margin(1e-10));
    }
  }

  // eigenvector equation per column
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      double av = 0.0;
      for (std::size_t j = 0; j < d; ++j) av += a(i, j) * e.eigenvectors(j, k);
      REQUIRE(av == Catch::Approx(e.eigenvalues[k] * e.eigenvectors(i, k))
                        .margin(1e-9));
    }
  }
}

TEST_CASE("eigendecomposition rejects non-square input", "[linalg]") {
  REQUIRE_THROWS_AS(sym_eig(Tensor({2, 3})), ShapeError);
}
