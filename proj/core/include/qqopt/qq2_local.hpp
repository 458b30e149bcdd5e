#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qqopt/qq2.hpp"
#include "qqopt/qq2_global.hpp"

namespace qqopt {

struct KKTData {
  Vector x;
  double alpha = 0.0;
  double beta = 0.0;
  double stationarity_residual = 0.0;  // relative to the gradient scale
  bool licq_ok = false;
  double licq_gram_lambda_min = 0.0;
  Matrix tangent_basis;  // n x (n-2) orthonormal; W^T A1 x = W^T A2 x = 0
};

/// Least-squares multipliers and tangent basis at a feasible boundary point.
/// Throws for infeasible points and for interior points (no active q2).
KKTData compute_kkt(const QQ2Problem& p, const Vector& x, double tol);

enum class Verdict {
  Infeasible,
  InteriorGlobal,
  InteriorNotLocal,
  GlobalBoundary,
  StrictLocalNonGlobal,
  NonStrictLocalNonGlobalCandidate,
  NotLocalMinimizer,
  LicqFailGlobal,
  LicqFailNotGlobal,
};

const char* to_string(Verdict v);

struct NonStrictDirection {
  Vector v_bar;        // unit vector
  double r_a1 = 0.0;   // |v^T A1 x|
  double r_a2 = 0.0;   // |v^T A2 x|
  double r_hess = 0.0; // |v^T G v|
  double r_form = 0.0; // |v^T (A2 - A1) v|
};

struct PointClassification {
  Verdict verdict = Verdict::Infeasible;
  double value = 0.0;  // q0(x)
  std::optional<KKTData> kkt;
  std::optional<Inertia> inertia_g;
  Vector projected_hessian_spectrum;  // eigenvalues of W^T G W when computed
  std::optional<NonStrictDirection> nonstrict;
  double global_value = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

/// Cached global solve shared across many classifications of one problem.
struct GlobalContext {
  bool available = false;
  double value = 0.0;
  std::string reason;
  Qq2Solution solution;
};

GlobalContext make_global_context(const QQ2Problem& p,
                                  const SolveOptions& opts = {});

/// Decision tree: feasibility, interior reduction to the one-constraint
/// problem, the LICQ-failure global comparison, then second-order analysis of
/// the Lagrangian Hessian on the tangent basis. In Inequality mode a
/// vanishing multiplier forces "local implies global" (strict
/// complementarity); in Equality mode both multipliers are free.
PointClassification classify_point(const QQ2Problem& p, const Vector& x,
                                   double tol, const SolveOptions& opts = {});
PointClassification classify_point(const QQ2Problem& p, const Vector& x,
                                   double tol, const GlobalContext& ctx,
                                   const SolveOptions& opts = {});

/// Zero direction of the projected Hessian that also annuls the form
/// A2 - A1: searched inside the null space of W^T G W via its extreme
/// eigenvectors. Empty when no such direction exists within tolerance.
std::optional<NonStrictDirection> find_nonstrict_direction(const QQ2Problem& p,
                                                           const Vector& x,
                                                           const KKTData& kkt,
                                                           double tol);

struct MultistartOptions {
  double step0 = 1.0;
  double shrink = 0.5;
  double armijo_slope = 1e-4;
  double grad_tol = 1e-9;
  int max_iters = 2000;
  double dedupe_dist = 1e-5;
};

/// Seeded multistart projected-gradient descent on {q1 = 1, q2 = 1} followed
/// by classification; returns only certified StrictLocalNonGlobal /
/// NonStrictLocalNonGlobalCandidate points. Sign pairs are deduplicated but
/// both members are reported. Output is sorted by (value, lexicographic).
std::vector<std::pair<Vector, PointClassification>> find_local_nonglobal(
    const QQ2Problem& p, int n_starts, std::uint64_t seed,
    const SolveOptions& opts = {}, const MultistartOptions& ms = {});

}  // namespace qqopt
