#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qqopt/etls.hpp"
#include "qqopt/oracle.hpp"
#include "test_util.hpp"

using namespace qqopt;
using namespace qqopt::testutil;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("etls_to_qq2 structure admits the identity combination") {
  std::mt19937_64 rng(127);
  Matrix a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  const ETLSProblem e(a, Vector(Vector::Ones(3)), Matrix::Identity(2, 2), 2.0);
  const auto p = etls_to_qq2(e);
  CHECK(p.n() == 3);
  CHECK(p.mode == ConstraintMode::Inequality);
  CHECK(lambda_min(p.a1.mat()) == doctest::Approx(1.0));
  // q2 - q1 carries the regularizer: positive on y-heavy directions,
  // negative on the z axis.
  Vector z = Vector::Zero(3);
  z[2] = 1.0;
  CHECK(p.q2(z) - p.q1(z) == doctest::Approx(-2.0));
}

TEST_CASE("existence assumption") {
  SUBCASE("square full-rank regularizer always passes") {
    const ETLSProblem e(Matrix::Identity(2, 2), vec2(1, 0),
                        Matrix::Identity(2, 2), 1.0);
    CHECK(etls_existence_assumption(e));
  }
  SUBCASE("projected spectra can refuse") {
    Matrix a(2, 2);
    a << 1, 0, 0, 0;  // A annihilates the null space of L
    Matrix l(1, 2);
    l << 1, 0;
    const ETLSProblem e(a, vec2(1, 1), l, 1.0);
    CHECK_FALSE(etls_existence_assumption(e));
    CHECK_THROWS_AS(solve_etls(e), SolveError);
  }
  SUBCASE("rank-deficient L is rejected on use") {
    Matrix l(2, 2);
    l << 1, 0, 1, 0;
    const ETLSProblem e(Matrix::Identity(2, 2), vec2(1, 0), l, 1.0);
    CHECK_THROWS_AS(etls_existence_assumption(e), std::invalid_argument);
  }
}

TEST_CASE("solve_etls") {
  SUBCASE("inactive regularizer reduces to plain total least squares") {
    const ETLSProblem e(Matrix::Identity(2, 2), vec2(1, 0),
                        Matrix::Identity(2, 2), 100.0);
    const auto sol = solve_etls(e);
    CHECK(sol.value <= 1e-10);
    CHECK((sol.x - vec2(1, 0)).norm() <= 1e-6);
  }
  SUBCASE("active trust region clips the consistent solution") {
    // min ((x1-2)^2 + x2^2) / (1 + |x|^2) on |x|^2 <= 1 attains 1/2 at (1, 0).
    const ETLSProblem e(Matrix::Identity(2, 2), vec2(2, 0),
                        Matrix::Identity(2, 2), 1.0);
    const auto sol = solve_etls(e);
    CHECK(std::abs(sol.value - 0.5) <= 1e-8);
    CHECK((sol.x - vec2(1, 0)).norm() <= 1e-6);
    // Cross-check on the sphere formulation.
    const auto orc = oracle_global(etls_to_qq2(e), 2e-3);
    CHECK(std::abs(sol.value - orc.value) <=
          std::max(1e-6, 2.0 * orc.error_bound));
  }
  SUBCASE("objective identity at the returned point") {
    std::mt19937_64 rng(131);
    for (int t = 0; t < 10; ++t) {
      const int n = 2 + int(rng() % 2);
      const int m = n + 1;
      Matrix a(m, n);
      for (int i = 0; i < m; ++i) a.row(i) = random_vec(n, rng).transpose();
      const Vector b = random_vec(m, rng);
      const ETLSProblem e(a, b, Matrix::Identity(n, n),
                          0.5 + std::abs(random_vec(1, rng)[0]));
      const auto sol = solve_etls(e);
      CHECK(std::abs(sol.value - e.objective(sol.x)) <= 1e-9);
      CHECK((e.l * sol.x).squaredNorm() <= e.rho + 1e-7);
      CHECK(sol.yz[n] > 0);
    }
  }
}

TEST_CASE("classify_etls_point") {
  const ETLSProblem e(Matrix::Identity(2, 2), vec2(2, 0),
                      Matrix::Identity(2, 2), 1.0);
  const auto sol = solve_etls(e);
  SUBCASE("returned solution classifies as a boundary global") {
    const auto c = classify_etls_point(e, sol.x, 1e-6);
    CHECK((c.verdict == Verdict::GlobalBoundary ||
           c.verdict == Verdict::InteriorGlobal));
  }
  SUBCASE("regularizer violation is infeasible") {
    const auto c = classify_etls_point(e, vec2(3, 3), 1e-6);
    CHECK(c.verdict == Verdict::Infeasible);
  }
  SUBCASE("off-stationary feasible point") {
    const auto c = classify_etls_point(e, vec2(0.3, 0.4), 1e-6);
    CHECK((c.verdict == Verdict::NotLocalMinimizer ||
           c.verdict == Verdict::InteriorNotLocal));
  }
}
