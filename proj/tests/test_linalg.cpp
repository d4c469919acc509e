#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "oracles.hpp"

using namespace iisim;
using namespace iisim::testing;

TEST_CASE("eig_sym matches the closed-form spectrum of a 2x2") {
  // [[3, 1.5], [1.5, 4]] has eigenvalues (7 -+ sqrt(10)) / 2.
  Matrix m = Matrix::from_rows({{3.0, 1.5}, {1.5, 4.0}});
  auto eig = eig_sym_all(m);
  REQUIRE(eig.size() == 2);
  CHECK(eig[0] == doctest::Approx((7.0 - std::sqrt(10.0)) / 2.0).epsilon(1e-12));
  CHECK(eig[1] == doctest::Approx((7.0 + std::sqrt(10.0)) / 2.0).epsilon(1e-12));

  SymEig ext = eig_sym(m);
  CHECK(ext.lambda_min == doctest::Approx(eig[0]).epsilon(1e-14));
  CHECK(ext.lambda_max == doctest::Approx(eig[1]).epsilon(1e-14));
}

TEST_CASE("eig_sym handles trivial shapes") {
  CHECK(eig_sym_all(Matrix::from_rows({{-2.5}}))[0] == doctest::Approx(-2.5));

  Matrix d = Matrix::from_rows({{4.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {0.0, 0.0, 2.0}});
  auto eig = eig_sym_all(d);
  CHECK(eig[0] == doctest::Approx(-1.0));
  CHECK(eig[1] == doctest::Approx(2.0));
  CHECK(eig[2] == doctest::Approx(4.0));
}

TEST_CASE("eig_sym rejects asymmetric input") {
  Matrix m = Matrix::from_rows({{1.0, 2.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(eig_sym_all(m), Error);
}

TEST_CASE("eigenvalue estimates bound random quadratic forms") {
  auto& rng = test_rng();
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + trial % 5;
    Matrix s = random_symmetric(rng, n);
    SymEig ext = eig_sym(s);

    Vec x(n);
    for (auto& v : x) v = dist(rng);
    double nrm = vec_norm(x);
    if (nrm < 1e-12) continue;
    for (auto& v : x) v /= nrm;

    double form = vec_dot(x, s.apply(x));
    CHECK(form >= ext.lambda_min - 1e-10);
    CHECK(form <= ext.lambda_max + 1e-10);
  }
}

TEST_CASE("spectral_norm matches hand-computed singular values") {
  // [[3,0],[4,5]]: Gram matrix [[25,20],[20,25]] has lambda_max 45.
  CHECK(spectral_norm(Matrix::from_rows({{3.0, 0.0}, {4.0, 5.0}})) ==
        doctest::Approx(3.0 * std::sqrt(5.0)).epsilon(1e-12));
  // A row vector's norm is its Euclidean length.
  CHECK(spectral_norm(Matrix::from_rows({{1.0, 2.0, 3.0}})) ==
        doctest::Approx(std::sqrt(14.0)).epsilon(1e-12));
  CHECK(spectral_norm(Matrix::identity(4)) == doctest::Approx(1.0));
}

TEST_CASE("spectral_norm is transpose invariant") {
  auto& rng = test_rng();
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m = random_matrix(rng, 2 + trial % 4, 2 + (trial / 2) % 4);
    CHECK(spectral_norm(m) == doctest::Approx(spectral_norm(m.transposed())).epsilon(1e-10));
  }
}

TEST_CASE("eig_general recovers known spectra") {
  SUBCASE("real eigenvalues of a 2x2 companion matrix") {
    // (z+1)(z+2): companion [[0,1],[-2,-3]]
    auto eig = eig_general(Matrix::from_rows({{0.0, 1.0}, {-2.0, -3.0}}));
    REQUIRE(eig.size() == 2);
    CHECK(eig[0].re == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(eig[1].re == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(std::abs(eig[0].im) < 1e-10);
    CHECK(std::abs(eig[1].im) < 1e-10);
  }

  SUBCASE("purely imaginary pair") {
    auto eig = eig_general(Matrix::from_rows({{0.0, 1.0}, {-1.0, 0.0}}));
    REQUIRE(eig.size() == 2);
    CHECK(std::abs(eig[0].re) < 1e-12);
    CHECK(std::abs(eig[1].re) < 1e-12);
    CHECK(eig[0].im == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(eig[1].im == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("3x3 companion matrix with spectrum {1,2,3}") {
    Matrix c = Matrix::from_rows({{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {6.0, -11.0, 6.0}});
    auto eig = eig_general(c);
    REQUIRE(eig.size() == 3);
    CHECK(eig[0].re == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(eig[1].re == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(eig[2].re == doctest::Approx(3.0).epsilon(1e-9));
    for (const auto& e : eig) CHECK(std::abs(e.im) < 1e-9);
  }

  SUBCASE("agrees with the symmetric solver on random symmetric matrices") {
    auto& rng = test_rng();
    for (int trial = 0; trial < 30; ++trial) {
      std::size_t n = 2 + trial % 5;
      Matrix s = random_symmetric(rng, n);
      auto general = eig_general(s);
      auto sym = eig_sym_all(s);
      REQUIRE(general.size() == sym.size());
      for (std::size_t i = 0; i < sym.size(); ++i) {
        CHECK(general[i].re == doctest::Approx(sym[i]).epsilon(1e-8));
        CHECK(std::abs(general[i].im) < 1e-8);
      }
    }
  }
}

TEST_CASE("is_hurwitz classifies stability correctly") {
  CHECK(is_hurwitz(Matrix::from_rows({{-1.0, 0.0}, {1.0, -2.0}})));
  CHECK(is_hurwitz(Matrix::from_rows({{-0.5}})));
  // Marginal: eigenvalues on the imaginary axis do not count as stable.
  CHECK_FALSE(is_hurwitz(Matrix::from_rows({{0.0, 1.0}, {-1.0, 0.0}})));
  // Plainly unstable.
  CHECK_FALSE(is_hurwitz(Matrix::from_rows({{1.5, 1.0}, {0.5, 2.0}})));
}

TEST_CASE("solve_dense solves a small pivoting-required system") {
  // First pivot is zero, so the elimination must swap rows.
  Matrix a = Matrix::from_rows({{0.0, 2.0, 1.0}, {1.0, 1.0, 1.0}, {2.0, 0.0, -1.0}});
  Vec x_true{1.0, -2.0, 3.0};
  Vec b = a.apply(x_true);
  Vec x = solve_dense(a, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-12));

  CHECK_THROWS_AS(solve_dense(Matrix::from_rows({{1.0, 2.0}, {2.0, 4.0}}), Vec{1.0, 1.0}),
                  Error);
}

TEST_CASE("solve_lyapunov reproduces a hand-solved 2x2 system") {
  // For A = [[-1,0],[1,-2]] the solution of A^T P + P A = -I worked out by
  // hand is P = [[7/12, 1/12], [1/12, 1/4]].
  Matrix a = Matrix::from_rows({{-1.0, 0.0}, {1.0, -2.0}});
  Matrix p = solve_lyapunov(a);
  CHECK(p(0, 0) == doctest::Approx(7.0 / 12.0).epsilon(1e-12));
  CHECK(p(0, 1) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
  CHECK(p(1, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
  CHECK(p(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("solve_lyapunov scalar case") {
  Matrix p = solve_lyapunov(Matrix::from_rows({{-0.5}}));
  CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("solve_lyapunov rejects non-Hurwitz input") {
  Matrix a = Matrix::from_rows({{1.5, 1.0}, {0.5, 2.0}});
  CHECK_THROWS_AS(solve_lyapunov(a), Error);
  try {
    solve_lyapunov(a);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::precondition);
  }
}

TEST_CASE("solve_lyapunov yields SPD solutions with tiny residuals") {
  auto& rng = test_rng();
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + trial % 6;
    Matrix a = random_hurwitz(rng, n);
    Matrix p = solve_lyapunov(a);

    // Symmetric by construction of the solver.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(p(i, j) == p(j, i));

    // Positive definite.
    CHECK(eig_sym(p).lambda_min > 0.0);

    // Residual of the defining equation at solver precision.
    Matrix residual = a.transposed() * p + p * a + Matrix::identity(n);
    CHECK(spectral_norm(residual) <= 1e-8);
  }
}
