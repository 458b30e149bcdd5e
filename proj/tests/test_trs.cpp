#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qqopt/qq2_local.hpp"
#include "qqopt/trs.hpp"
#include "test_util.hpp"

using namespace qqopt;
using namespace qqopt::testutil;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

/// Brute-force reference on the disk: polar grid plus the unconstrained
/// stationary point when it is interior.
double disk_oracle(const TRSProblem& t, int grid = 2000) {
  REQUIRE(t.n() == 2);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double r = double(i) / grid;
    for (int j = 0; j < grid; ++j) {
      const double th = 2.0 * M_PI * j / grid;
      best = std::min(best, t.objective(vec2(r * std::cos(th), r * std::sin(th))));
    }
  }
  return best;
}

void check_ms_conditions(const TRSProblem& t, const Vector& x, double mu,
                         double tol = 1e-8) {
  const int n = t.n();
  const Matrix h = t.q.mat() + mu * Matrix::Identity(n, n);
  CHECK((h * x + t.b).norm() <= tol * std::max(1.0, t.q.norm() + t.b.norm()));
  CHECK(mu >= -tol);
  CHECK(std::abs(mu * (1.0 - x.squaredNorm())) <= tol * std::max(1.0, mu));
  CHECK(x.squaredNorm() <= 1.0 + tol);
  CHECK(lambda_min(h) >= -tol * std::max(1.0, h.norm()));
}

}  // namespace

TEST_CASE("homogenize_trs layout") {
  SUBCASE("scalar zero problem") {
    Vector b(1);
    b << 0;
    const auto p = homogenize_trs(TRSProblem(SymMat::zero(1), b));
    CHECK(p.n() == 2);
    CHECK(p.a0.norm() == 0.0);
    CHECK(p.a1(1, 1) == 1.0);
    CHECK(p.a1(0, 0) == 0.0);
    CHECK(p.a2(0, 0) == 1.0);
    CHECK(p.a2(1, 1) == 0.0);
    CHECK(p.mode == ConstraintMode::Inequality);
  }
  SUBCASE("objective identity along the sign pair") {
    std::mt19937_64 rng(101);
    const TRSProblem t(SymMat(random_sym(3, rng)), random_vec(3, rng));
    const auto p = homogenize_trs(t);
    for (int k = 0; k < 10; ++k) {
      const Vector x = 0.7 * random_vec(3, rng).normalized();
      Vector xz(4), mz(4);
      xz << x, 1.0;
      mz << -x, -1.0;
      CHECK(p.q0(xz) == doctest::Approx(t.objective(x)));
      CHECK(p.q0(mz) == doctest::Approx(t.objective(x)));
    }
  }
}

TEST_CASE("solve_trs_global") {
  SUBCASE("convex with interior solution") {
    const auto g = solve_trs_global(TRSProblem(SymMat::identity(2), vec2(0, 0)));
    CHECK(g.value == doctest::Approx(0.0));
    CHECK(g.x.norm() <= 1e-9);
  }
  SUBCASE("indefinite with a linear pull") {
    const TRSProblem t(SymMat::diag(vec2(-1, 1)), vec2(0, 2));
    const auto g = solve_trs_global(t);
    CHECK(std::abs(g.value - (-3.0)) <= 1e-9);
    CHECK(std::abs(g.value - disk_oracle(t)) <= 1e-3);
    check_ms_conditions(t, g.x, g.mu);
  }
  SUBCASE("pure eigen case") {
    const auto g = solve_trs_global(TRSProblem(SymMat::diag(vec2(-2, 1)), vec2(0, 0)));
    CHECK(g.value == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(std::abs(g.x[0]) == doctest::Approx(1.0).epsilon(1e-7));
  }
  SUBCASE("one-dimensional closed form") {
    Vector q(1), b(1);
    q << -2;
    b << 0.5;
    const auto g = solve_trs_global(TRSProblem(SymMat::diag(q), b));
    CHECK(g.value == doctest::Approx(-3.0));  // min(-2x^2 + x) on [-1,1] at -1
    CHECK(g.x[0] == doctest::Approx(-1.0));
  }
}

TEST_CASE("find_trs_local_nonglobal") {
  SUBCASE("pull too weak to create a second basin") {
    Vector b(2);
    b << 0, 0.1;
    CHECK_FALSE(
        find_trs_local_nonglobal(TRSProblem(SymMat::diag(vec2(-2, 1)), b)));
  }
  SUBCASE("positive definite Hessian never qualifies") {
    CHECK_FALSE(
        find_trs_local_nonglobal(TRSProblem(SymMat::identity(2), vec2(1, 1))));
  }
  SUBCASE("constructed instances certify or reject cleanly") {
    std::mt19937_64 rng(107);
    int certified = 0;
    for (int t = 0; t < 60; ++t) {
      const int n = 2 + int(rng() % 4);
      Vector lam = random_vec(n, rng).cwiseAbs();
      std::sort(lam.data(), lam.data() + n);
      lam[0] = -1.0 - lam[0];  // simple negative bottom eigenvalue
      const Matrix u = random_orthogonal(n, rng);
      // Plant a unit-norm stationary point with multiplier inside the
      // admissible window.
      const double lo = std::max(0.0, -lam[1]);
      const double hi = -lam[0];
      if (hi <= lo + 1e-6) continue;
      std::uniform_real_distribution<double> unif(0.05, 0.95);
      const double mu_hat = lo + unif(rng) * (hi - lo);
      const Vector y = random_vec(n, rng).normalized();
      const Matrix q = u * lam.asDiagonal() * u.transpose();
      const Vector b = -(q + mu_hat * Matrix::Identity(n, n)) * y;
      const TRSProblem trs(SymMat(q), b);
      const auto found = find_trs_local_nonglobal(trs);
      const auto roots = trs_secular_roots(trs);
      // The planted multiplier appears among the scanned roots.
      bool seen = false;
      for (const auto& r : roots) seen = seen || std::abs(r.mu - mu_hat) <= 1e-6;
      CHECK(seen);
      if (found) {
        ++certified;
        CHECK(found->mu > 0);
        CHECK(found->secular_residual <= 1e-8);
        CHECK(found->projected_lambda_min > 0);
        const Matrix h =
            trs.q.mat() + found->mu * Matrix::Identity(n, n);
        CHECK((h * found->y + trs.b).norm() <=
              1e-8 * std::max(1.0, trs.q.norm() + trs.b.norm()));
        CHECK(lambda_min(h) < 0);  // the full Hessian stays indefinite
        // The homogenized classification agrees.
        const auto p = homogenize_trs(trs);
        Vector yz(n + 1);
        yz << found->y, 1.0;
        const auto cls = classify_point(p, yz, 1e-6);
        CHECK(cls.verdict == Verdict::StrictLocalNonGlobal);
      }
    }
    MESSAGE("certified local non-global minimizers: ", certified);
    CHECK(certified >= 5);
  }
}

TEST_CASE("generate_trs_hard_case") {
  SUBCASE("two-dimensional weights normalize to the boundary sum") {
    Vector lam = vec2(-1, 1);
    Vector w(1);
    w << 1;
    const auto t = generate_trs_hard_case(lam, Matrix::Identity(2, 2), w);
    CHECK(t.b[0] == doctest::Approx(0.0));
    CHECK(std::abs(t.b[1]) == doctest::Approx(2.0));
  }
  SUBCASE("repeated bottom eigenvalue") {
    Vector lam(3), w(1);
    lam << -1, -1, 2;
    w << 1;
    const auto t = generate_trs_hard_case(lam, Matrix::Identity(3, 3), w);
    CHECK(t.b[0] == doctest::Approx(0.0));
    CHECK(t.b[1] == doctest::Approx(0.0));
    CHECK(std::abs(t.b[2]) == doctest::Approx(3.0));
  }
  SUBCASE("bottom level filling the spectrum has no hard case") {
    Vector lam = vec2(-1, -1);
    Vector w(0);
    CHECK_THROWS_AS(generate_trs_hard_case(lam, Matrix::Identity(2, 2), w),
                    std::invalid_argument);
  }
  SUBCASE("all-zero weights are rejected") {
    Vector lam = vec2(-1, 1);
    Vector w(1);
    w << 0;
    CHECK_THROWS_AS(generate_trs_hard_case(lam, Matrix::Identity(2, 2), w),
                    std::invalid_argument);
  }
}

TEST_CASE("check_sosc_at_global") {
  SUBCASE("boundary hard case: strict global, second-order gap") {
    const auto rep =
        check_sosc_at_global(TRSProblem(SymMat::diag(vec2(-1, 1)), vec2(0, 2)));
    CHECK(rep.strict_global);
    CHECK_FALSE(rep.sosc_holds);
    CHECK(rep.mu == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("convex boundary case keeps the condition") {
    const auto rep =
        check_sosc_at_global(TRSProblem(SymMat::identity(2), vec2(0, 1)));
    CHECK(rep.sosc_holds);
    CHECK(rep.strict_global);
  }
  SUBCASE("repeated bottom eigenvalue at the boundary sum") {
    // sum over the top block equals one, so the minimizer is still unique;
    // the second-order sufficient condition fails along the bottom space.
    Vector lam(3), b(3);
    lam << -1, -1, 2;
    b << 0, 0, 3;
    const auto rep = check_sosc_at_global(TRSProblem(SymMat::diag(lam), b));
    CHECK(rep.strict_global);
    CHECK_FALSE(rep.sosc_holds);
    CHECK((rep.x - Vector(-Vector::Unit(3, 2))).norm() <= 1e-6);
  }
  SUBCASE("interior family when the sum stays below one") {
    // With ||y_bar|| < 1 and a repeated bottom eigenvalue the minimizers
    // form a circle: not strict.
    Vector lam(3), b(3);
    lam << -1, -1, 2;
    b << 0, 0, 1.5;
    const auto rep = check_sosc_at_global(TRSProblem(SymMat::diag(lam), b));
    CHECK_FALSE(rep.strict_global);
    CHECK_FALSE(rep.sosc_holds);
  }
  SUBCASE("generated hard cases carry the advertised flags") {
    std::mt19937_64 rng(109);
    for (int t = 0; t < 12; ++t) {
      const int n = 2 + int(rng() % 4);
      const int m = 1 + int(rng() % (n - 1));
      Vector lam(n);
      lam[0] = -1.0 - std::abs(random_vec(1, rng)[0]);
      for (int i = 1; i < m; ++i) lam[i] = lam[0];
      for (int i = m; i < n; ++i)
        lam[i] = lam[0] + 0.5 + std::abs(random_vec(1, rng)[0]);
      std::sort(lam.data(), lam.data() + n);
      const Matrix u = random_orthogonal(n, rng);
      Vector w = random_vec(n - m, rng);
      if (w.norm() < 1e-3) w[0] = 1.0;
      const auto hard = generate_trs_hard_case(lam, u, w);
      const auto rep = check_sosc_at_global(hard);
      CHECK(rep.strict_global);
      CHECK_FALSE(rep.sosc_holds);
    }
  }
}

TEST_CASE("at most one certified local non-global minimizer") {
  std::mt19937_64 rng(113);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + int(rng() % 5);
    const TRSProblem trs(SymMat(random_sym(n, rng)), random_vec(n, rng));
    CHECK_NOTHROW(find_trs_local_nonglobal(trs));  // throws on a double find
  }
}

TEST_CASE("solve_trs bundle flags the hard case") {
  const auto sol = solve_trs(TRSProblem(SymMat::diag(vec2(-1, 1)), vec2(0, 2)));
  CHECK(sol.hard_case);
  CHECK(std::abs(sol.global_value - (-3.0)) <= 1e-9);
  CHECK_FALSE(sol.local_nonglobal.has_value());
}
