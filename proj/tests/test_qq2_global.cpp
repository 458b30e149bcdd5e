#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qqopt/oracle.hpp"
#include "qqopt/qq2_global.hpp"
#include "test_util.hpp"

using namespace qqopt;
using namespace qqopt::testutil;

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

QQ2Problem circle_family_instance() {
  Matrix a0(3, 3);
  a0 << -std::sqrt(2.0), 0.5, 0, 0.5, 0, 0, 0, 0, 0;
  return QQ2Problem(SymMat(a0), SymMat::identity(3),
                    SymMat::diag(vec3(2, 0.5, 1)), ConstraintMode::Equality);
}

QQ2Problem four_minima_instance() {
  Matrix a0(3, 3);
  a0 << 0, 0.5, 0, 0.5, 0, 1.5, 0, 1.5, 0;
  return QQ2Problem(SymMat(a0), SymMat::identity(3),
                    SymMat::diag(vec3(-20, 0, 10)), ConstraintMode::Equality);
}

}  // namespace

TEST_CASE("check_assumptions") {
  SUBCASE("sphere with an indefinite second form") {
    QQ2Problem p(SymMat::zero(3), SymMat::identity(3),
                 SymMat::diag(vec3(-20, 0, 10)), ConstraintMode::Equality);
    const auto rep = check_assumptions(p);
    REQUIRE(rep.definite_combination.has_value());
    CHECK(rep.interior_witness.has_value());
    CHECK(rep.exterior_witness.has_value());
    CHECK(rep.q2_min == doctest::Approx(-20.0).epsilon(1e-8));
    CHECK(rep.q2_max == doctest::Approx(10.0).epsilon(1e-8));
    CHECK(rep.a2_minus_a1_indefinite);
    // Witnesses re-validate.
    CHECK(std::abs(p.q1(*rep.interior_witness) - 1.0) <= 1e-9);
    CHECK(p.q2(*rep.interior_witness) < 1.0 - 1e-9);
    CHECK(std::abs(p.q1(*rep.exterior_witness) - 1.0) <= 1e-9);
    CHECK(p.q2(*rep.exterior_witness) > 1.0 + 1e-9);
  }
  SUBCASE("identical constraints have no witnesses") {
    QQ2Problem p(SymMat::zero(3), SymMat::identity(3), SymMat::identity(3),
                 ConstraintMode::Inequality);
    const auto rep = check_assumptions(p);
    CHECK_FALSE(rep.interior_witness.has_value());
    CHECK_FALSE(rep.exterior_witness.has_value());
    CHECK(rep.q2_min == doctest::Approx(1.0));
    CHECK(rep.q2_max == doctest::Approx(1.0));
  }
  SUBCASE("opposite pair has no definite combination") {
    Vector d(3);
    d << 1, -1, 1;
    QQ2Problem p(SymMat::identity(3), SymMat::diag(d),
                 SymMat::diag(Vector(-d)), ConstraintMode::Inequality);
    const auto rep = check_assumptions(p);
    CHECK_FALSE(rep.definite_combination.has_value());
  }
}

TEST_CASE("check_compactness") {
  SUBCASE("sphere equality") {
    QQ2Problem p(SymMat::zero(3), SymMat::identity(3),
                 SymMat::diag(vec3(-20, 0, 10)), ConstraintMode::Equality);
    CHECK(check_compactness(p).result == Compactness::CompactEquality);
  }
  SUBCASE("inequality with a one-parameter window") {
    QQ2Problem p(SymMat::zero(3), SymMat::diag(vec3(1, -1, 0)),
                 SymMat::diag(vec3(0, 1, 1)), ConstraintMode::Inequality);
    const auto rep = check_compactness(p);
    CHECK(rep.result == Compactness::CompactInequality);
    CHECK(rep.mu1 > 0.0);
    CHECK(rep.mu1 < 1.0);
  }
  SUBCASE("unbounded hyperboloid") {
    QQ2Problem p(SymMat::zero(3), SymMat::diag(vec3(1, -1, 1)), SymMat::zero(3),
                 ConstraintMode::Inequality);
    CHECK(check_compactness(p).result == Compactness::NotCompact);
  }
  SUBCASE("empty feasible set") {
    QQ2Problem p(SymMat::zero(3), SymMat(-Matrix::Identity(3, 3)),
                 SymMat::zero(3), ConstraintMode::Inequality);
    CHECK(check_compactness(p).result == Compactness::EmptyFeasible);
  }
  SUBCASE("planted definite combinations are detected") {
    std::mt19937_64 rng(19);
    for (int t = 0; t < 15; ++t) {
      const auto pi = plant_compact_ineq(3, rng);
      CHECK(check_compactness(pi).result == Compactness::CompactInequality);
      const auto pe = plant_compact_eq(3, rng);
      CHECK(check_compactness(pe).result == Compactness::CompactEquality);
    }
  }
  SUBCASE("planted rays are flagged and feasible") {
    std::mt19937_64 rng(20);
    for (int t = 0; t < 8; ++t) {
      const auto inst = plant_unbounded(rng, ConstraintMode::Equality);
      CHECK(check_compactness(inst.p).result == Compactness::NotCompact);
      for (double s : {1.0, 2.0, 5.0, 10.0}) {
        const Vector x = unbounded_ray_point(inst, s);
        CHECK(std::abs(inst.p.q1(x) - 1.0) <= 1e-8 * x.squaredNorm());
        CHECK(std::abs(inst.p.q2(x) - 1.0) <= 1e-8 * x.squaredNorm());
      }
    }
  }
}

TEST_CASE("solve_dual on the all-identity instance") {
  QQ2Problem p(SymMat::identity(3), SymMat::identity(3), SymMat::identity(3),
               ConstraintMode::Inequality);
  const auto d = solve_dual(p);
  REQUIRE(d.status == DualStatus::Optimal);
  CHECK(d.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.beta >= -1e-12);
  CHECK(-d.alpha - d.beta == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("solve_dual reproduces the circle-family optimum") {
  const auto d = solve_dual(circle_family_instance());
  REQUIRE(d.status == DualStatus::Optimal);
  CHECK(std::abs(d.value - (-2.0 * std::sqrt(2.0) / 3.0)) <= 1e-8);
}

TEST_CASE("recover_primal") {
  SUBCASE("circle-family minimizer") {
    const auto p = circle_family_instance();
    const auto d = solve_dual(p);
    const Vector x = recover_primal(p, d.alpha, d.beta, 1e-7);
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    CHECK(std::abs(std::abs(x[0]) - inv_sqrt3) <= 1e-6);
    CHECK(std::abs(std::abs(x[1]) - std::sqrt(2.0) * inv_sqrt3) <= 1e-6);
    CHECK(std::abs(x[2]) <= 1e-6);
    CHECK(x[0] * x[1] < 0);  // opposite signs in either representative
  }
  SUBCASE("inconsistent certificate is refused") {
    QQ2Problem p(SymMat::diag(vec3(0, 1, 1)), SymMat::identity(3),
                 SymMat::diag(vec3(2, 1, 1)), ConstraintMode::Inequality);
    CHECK_THROWS_AS(recover_primal(p, 0.0, 0.0, 1e-7), SolveError);
  }
  SUBCASE("two-dimensional null space hits the boundary") {
    // A0 = diag(-3, 1, 1) with beta = 1 gives G = diag(0, 0, 1).
    QQ2Problem p(SymMat::diag(vec3(-3, 1, 1)), SymMat::identity(3),
                 SymMat::diag(vec3(3, -1, 0)), ConstraintMode::Inequality);
    const Vector x = recover_primal(p, 0.0, 1.0, 1e-7);
    CHECK(std::abs(std::abs(x[0]) - std::sqrt(0.5)) <= 1e-9);
    CHECK(std::abs(std::abs(x[1]) - std::sqrt(0.5)) <= 1e-9);
    CHECK(std::abs(x[2]) <= 1e-12);
    CHECK(std::abs(p.q2(x) - 1.0) <= 1e-9);
  }
}

TEST_CASE("verify_global_certificate itemizes failures") {
  const auto p = circle_family_instance();
  const auto sol = solve_qq2(p);
  REQUIRE(sol.status == Qq2Status::Global);
  const auto ok = verify_global_certificate(p, sol.x_star, sol.certificate.alpha,
                                            sol.certificate.beta, 1e-7);
  CHECK(ok.pass);

  const auto bad_scale = verify_global_certificate(
      p, Vector(2.0 * sol.x_star), sol.certificate.alpha, sol.certificate.beta,
      1e-7);
  CHECK_FALSE(bad_scale.pass);
  CHECK_FALSE(bad_scale.feasibility);

  // A negative multiplier on the inequality side must be rejected.
  QQ2Problem pi(p.a0, p.a1, p.a2, ConstraintMode::Inequality);
  const auto bad_sign = verify_global_certificate(pi, sol.x_star, 0.0, -0.1, 1e-7);
  CHECK_FALSE(bad_sign.multiplier_sign);
  CHECK_FALSE(bad_sign.pass);
}

TEST_CASE("solve_qq2 end to end") {
  SUBCASE("circle-family value") {
    const auto sol = solve_qq2(circle_family_instance());
    REQUIRE(sol.status == Qq2Status::Global);
    CHECK(std::abs(sol.value - (-2.0 * std::sqrt(2.0) / 3.0)) <= 1e-8);
    CHECK(sol.check.pass);
  }
  SUBCASE("four-minima instance agrees with the oracle") {
    const auto p = four_minima_instance();
    const auto sol = solve_qq2(p);
    REQUIRE(sol.status == Qq2Status::Global);
    CHECK(std::abs(std::abs(sol.x_star[0]) - 0.3611) <= 5e-4);
    // Thin sampling band: the spread of q0 across the default band would
    // dominate the comparison otherwise.
    const auto orc = oracle_global(p, 1e-3, 1e-3);
    CHECK(std::abs(sol.value - orc.value) <= 1e-2);
  }
  SUBCASE("all-identity reduces to the single-constraint problem") {
    QQ2Problem p(SymMat::identity(3), SymMat::identity(3), SymMat::identity(3),
                 ConstraintMode::Inequality);
    const auto sol = solve_qq2(p);
    REQUIRE(sol.status == Qq2Status::Global);
    CHECK(sol.reduced_to_qq1);
    CHECK(sol.value == doctest::Approx(1.0));
  }
  SUBCASE("unsatisfiable first constraint") {
    QQ2Problem p(SymMat::identity(3), SymMat(-Matrix::Identity(3, 3)),
                 SymMat::identity(3), ConstraintMode::Inequality);
    CHECK(solve_qq2(p).status == Qq2Status::Infeasible);
  }
  SUBCASE("missing definite combination is an assumption failure") {
    Vector d(3);
    d << 1, -1, 1;
    QQ2Problem p(SymMat::identity(3), SymMat::diag(d),
                 SymMat::diag(Vector(-d)), ConstraintMode::Inequality);
    CHECK(solve_qq2(p).status == Qq2Status::AssumptionFailure);
  }
  SUBCASE("dimension floor") {
    QQ2Problem p(SymMat::identity(2), SymMat::identity(2), SymMat::identity(2),
                 ConstraintMode::Inequality);
    CHECK_THROWS_AS(solve_qq2(p), std::invalid_argument);
  }
  SUBCASE("objective unbounded along a feasible ray") {
    // q2 never exceeds 1 on {q1 = 1}, so the problem reduces to the
    // one-constraint form, whose infimum here is -inf along (0, t, t).
    QQ2Problem p(SymMat::diag(vec3(0, 0, -1)), SymMat::diag(vec3(2, 1, -1)),
                 SymMat::diag(vec3(1, 0, -2)), ConstraintMode::Inequality);
    const auto sol = solve_qq2(p);
    CHECK(sol.status == Qq2Status::Unbounded);
    CHECK(sol.reduced_to_qq1);
  }
}

TEST_CASE("weak and strong duality against the brute-force oracle") {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 12; ++t) {
    const auto p = plant_compact_ineq(3, rng);
    Qq2Solution sol;
    try {
      sol = solve_qq2(p);
    } catch (const SolveError&) {
      continue;  // assumption-degenerate draw
    }
    if (sol.status != Qq2Status::Global) continue;
    const auto orc = oracle_global(p, 5e-3);
    // No dual-feasible trace point may exceed the oracle value.
    for (const auto& it : sol.dual.trace) {
      if (it.feasible) CHECK(it.objective <= orc.value + 1e-6);
    }
    if (!sol.reduced_to_qq1) {
      CHECK(std::abs(sol.value - sol.dual.value) <= 1e-6 * p.scale());
    }
    CHECK(std::abs(sol.value - orc.value) <=
          std::max(1e-6, 2.0 * orc.error_bound));
  }
}

TEST_CASE("certificate idempotence and congruence metamorphic") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 10; ++t) {
    const auto p = plant_compact_ineq(3, rng);
    Qq2Solution sol;
    try {
      sol = solve_qq2(p);
    } catch (const SolveError&) {
      continue;
    }
    if (sol.status != Qq2Status::Global) continue;
    const auto check = verify_global_certificate(
        p, sol.x_star, sol.certificate.alpha, sol.certificate.beta, 1e-7);
    CHECK(check.pass);
    CHECK(std::abs(p.q1(sol.x_star) - 1.0) <= 1e-9);
    CHECK(p.q2(sol.x_star) <= 1.0 + 1e-9);
    CHECK(std::abs(sol.certificate.beta * (p.q2(sol.x_star) - 1.0)) <= 1e-7);

    const Matrix q = random_conditioned(3, 20.0, rng);
    QQ2Problem pt(SymMat(Matrix(q.transpose() * p.a0.mat() * q)),
                  SymMat(Matrix(q.transpose() * p.a1.mat() * q)),
                  SymMat(Matrix(q.transpose() * p.a2.mat() * q)), p.mode);
    Qq2Solution sot;
    try {
      sot = solve_qq2(pt);
    } catch (const SolveError&) {
      continue;
    }
    REQUIRE(sot.status == Qq2Status::Global);
    CHECK(std::abs(sot.value - sol.value) <= 1e-6 * std::max(1.0, std::abs(sol.value)));
  }
}
