#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qqopt/pencil.hpp"
#include "test_util.hpp"

using namespace qqopt;
using namespace qqopt::testutil;

TEST_CASE("find_definite_shift basics") {
  SUBCASE("zero shift suffices") {
    const auto r = find_definite_shift(SymMat::identity(2), SymMat::zero(2));
    REQUIRE(r.has_value());
    CHECK(r->certificate.lambda_min_achieved > 0.9);
  }
  SUBCASE("shift needed") {
    Vector a(2), b(2);
    a << 1, -1;
    b << 0, 1;
    const auto r = find_definite_shift(SymMat::diag(a), SymMat::diag(b));
    REQUIRE(r.has_value());
    CHECK(lambda_min(Matrix(Matrix(a.asDiagonal()) +
                            r->mu * Matrix(b.asDiagonal()))) > 0);
  }
  SUBCASE("no shift exists") {
    Vector b(2);
    b << 1, -1;
    CHECK_FALSE(find_definite_shift(SymMat::zero(2), SymMat::diag(b)));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(
        find_definite_shift(SymMat::identity(2), SymMat::identity(3)),
        std::invalid_argument);
  }
}

TEST_CASE("find_definite_shift agrees with a fine grid") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    const SymMat a(random_sym(3, rng));
    const SymMat b(random_sym(3, rng));
    const auto r = find_definite_shift(a, b);
    bool grid_positive = false;
    for (int k = -1000; k <= 1000 && !grid_positive; ++k) {
      grid_positive = lambda_min(a.mat() + double(k) * b.mat()) > 1e-9;
    }
    if (r) {
      CHECK(lambda_min(a.mat() + r->mu * b.mat()) > 0);
    } else {
      CHECK_FALSE(grid_positive);
    }
  }
}

TEST_CASE("find_definite_pencil2 basics") {
  SUBCASE("identity pair") {
    Vector d(3);
    d << 2, 0.5, 1;
    const auto r = find_definite_pencil2(SymMat::identity(3), SymMat::diag(d));
    REQUIRE(r.found);
    CHECK(std::abs(std::hypot(r.mu1, r.mu2) - 1.0) <= 1e-12);
    CHECK(r.certificate->lambda_min_achieved > 0);
  }
  SUBCASE("opposing signatures have no combination") {
    Vector a(2), b(2);
    a << 1, -1;
    b << -1, 1;
    const auto r = find_definite_pencil2(SymMat::diag(a), SymMat::diag(b));
    CHECK_FALSE(r.found);
  }
  SUBCASE("sphere plus indefinite diagonal") {
    Vector d(3);
    d << -20, 0, 10;
    const auto r = find_definite_pencil2(SymMat::identity(3), SymMat::diag(d));
    REQUIRE(r.found);
    CHECK(lambda_min(r.mu1 * Matrix::Identity(3, 3) +
                     r.mu2 * Matrix(d.asDiagonal())) > 0);
  }
  SUBCASE("provable nonexistence carries a margin argument") {
    Vector d1(3), d2(3);
    d1 << 1, -1, 0;
    d2 << 0, 1, -1;
    const auto r = find_definite_pencil2(SymMat::diag(d1), SymMat::diag(d2));
    CHECK_FALSE(r.found);
    CHECK(r.definitely_none);
  }
}

TEST_CASE("narrow arcs are never certified nonexistent") {
  // The definite directions of diag(1,-1), diag(-1, 1+delta) form an arc of
  // width ~delta/2; below the grid resolution the search may miss it but
  // must not claim a proof of nonexistence.
  for (const double delta : {1e-2, 1e-3, 1e-4, 1e-5}) {
    Vector d1(2), d2(2);
    d1 << 1, -1;
    d2 << -1, 1 + delta;
    const auto r = find_definite_pencil2(SymMat::diag(d1), SymMat::diag(d2));
    CHECK_FALSE(r.definitely_none);
    if (r.found) {
      CHECK(lambda_min(r.mu1 * Matrix(d1.asDiagonal()) +
                       r.mu2 * Matrix(d2.asDiagonal())) > 0);
    }
  }
}

TEST_CASE("pencil search result re-validates") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + int(rng() % 3);
    const Matrix w = random_spd(n, rng);
    const Matrix a1 = random_sym(n, rng);
    const Matrix a2 = w - 0.7 * a1;
    const auto r = find_definite_pencil2(SymMat(a1), SymMat(a2));
    REQUIRE(r.found);
    const double lam = lambda_min(r.mu1 * a1 + r.mu2 * a2);
    CHECK(lam > 0);
    CHECK(std::abs(lam - r.certificate->lambda_min_achieved) <=
          1e-9 * std::max(1.0, std::abs(lam)));
  }
}

TEST_CASE("min_shift_psd finds the left endpoint") {
  Vector a(2), b(2);
  a << 2, 1;
  b << 1, -1;
  const auto t = min_shift_psd(Matrix(a.asDiagonal()), Matrix(b.asDiagonal()));
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("congruence_diagonalize") {
  SUBCASE("identity metric") {
    Vector d(3);
    d << 0.5, 2, -1;
    const auto c = congruence_diagonalize(SymMat::identity(3), SymMat::diag(d),
                                          1.0, 0.0);
    const Matrix s = c.p.transpose() * Matrix::Identity(3, 3) * c.p;
    CHECK((s - Matrix::Identity(3, 3)).norm() <= 1e-8);
    Vector sorted = d;
    std::sort(sorted.data(), sorted.data() + 3);
    for (int i = 0; i < 3; ++i) CHECK(c.d2[i] == doctest::Approx(sorted[i]));
  }
  SUBCASE("scalar example") {
    Vector four(1), one(1);
    four << 4;
    one << 1;
    const auto c =
        congruence_diagonalize(SymMat::diag(four), SymMat::diag(one), 1.0, 0.0);
    CHECK(std::abs(std::abs(c.p(0, 0)) - 0.5) <= 1e-12);
    CHECK(c.d2[0] == doctest::Approx(0.25));
    CHECK(c.d1[0] == doctest::Approx(1.0));
  }
  SUBCASE("random pair residuals") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
      const int n = 3 + int(rng() % 3);
      const Matrix a1 = random_spd(n, rng);
      const Matrix a2 = random_sym(n, rng);
      const auto c = congruence_diagonalize(SymMat(a1), SymMat(a2), 1.0, 0.0);
      CHECK((c.p.transpose() * a1 * c.p - Matrix::Identity(n, n)).norm() <=
            1e-8 * std::max(1.0, a1.norm()));
      CHECK((c.p.transpose() * a2 * c.p - Matrix(c.d2.asDiagonal())).norm() <=
            1e-8 * std::max(1.0, a2.norm()));
      // mu1 d1 + mu2 d2 = 1 componentwise
      for (int i = 0; i < n; ++i) {
        CHECK(1.0 * c.d1[i] + 0.0 * c.d2[i] == doctest::Approx(1.0));
      }
    }
  }
  SUBCASE("mixed direction uses the larger coefficient") {
    std::mt19937_64 rng(6);
    const Matrix a1 = random_sym(4, rng);
    const Matrix w = random_spd(4, rng);
    const double mu1 = 0.3, mu2 = 0.9;
    const Matrix a2 = (w - mu1 * a1) / mu2;
    const auto c = congruence_diagonalize(SymMat(a1), SymMat(a2), mu1, mu2);
    const Matrix s = mu1 * a1 + mu2 * a2;
    CHECK((c.p.transpose() * s * c.p - Matrix::Identity(4, 4)).norm() <= 1e-8);
    CHECK((c.p.transpose() * a2 * c.p - Matrix(c.d2.asDiagonal())).norm() <=
          1e-7 * std::max(1.0, a2.norm()));
  }
  SUBCASE("rejects an indefinite metric") {
    Vector d(2);
    d << 1, -1;
    CHECK_THROWS_AS(
        congruence_diagonalize(SymMat::diag(d), SymMat::identity(2), 1.0, 0.0),
        std::invalid_argument);
  }
}
