#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qqopt/qq2.hpp"
#include "qqopt/qq2_global.hpp"

namespace qqopt {

/// min x^T Q x + 2 b^T x subject to ||x||^2 <= 1.
struct TRSProblem {
  TRSProblem(SymMat q_, Vector b_) : q(std::move(q_)), b(std::move(b_)) {
    if (q.n() != b.size()) {
      throw std::invalid_argument("TRSProblem: dimension mismatch");
    }
    if (!b.allFinite()) {
      throw std::invalid_argument("TRSProblem: b must be finite");
    }
  }
  SymMat q;
  Vector b;
  int n() const { return q.n(); }
  double objective(const Vector& x) const {
    return q.quad(x) + 2.0 * b.dot(x);
  }
};

/// Homogenization to (x, z) with q1 = z^2 = 1 and q2 = ||x||^2 <= 1:
/// A0 = [[Q, b], [b^T, 0]], A1 = diag(0, .., 0, 1), A2 = diag(1, .., 1, 0).
QQ2Problem homogenize_trs(const TRSProblem& t);

/// Global solve through the homogenized two-constraint problem (closed form
/// for n = 1). The returned multiplier satisfies the classical conditions
/// (Q + mu I) x + b = 0, mu >= 0, mu (1 - ||x||^2) = 0, Q + mu I PSD.
struct TRSGlobal {
  Vector x;
  double value;
  double mu;
};
TRSGlobal solve_trs_global(const TRSProblem& t, const SolveOptions& opts = {});

struct TRSLocalNonGlobal {
  Vector y;                    // unit-norm local non-global minimizer
  double mu;                   // multiplier in (max{0, -lambda_2}, -lambda_1)
  double secular_residual;     // | ||(Q + mu I)^{-1} b||^2 - 1 |
  double projected_lambda_min; // of the Hessian on the tangent space
};

/// Root report for one scanned multiplier candidate (testing hook).
struct TRSSecularRoot {
  double mu;
  Vector y;
  bool certified;  // projected Hessian positive definite at the root
};

/// Dense mu-grid over the admissible open interval followed by Newton polish;
/// each root is checked against the second-order condition. At most one
/// certified minimizer can exist; two would be a logic error.
std::optional<TRSLocalNonGlobal> find_trs_local_nonglobal(const TRSProblem& t,
                                                          int grid = 1024);
std::vector<TRSSecularRoot> trs_secular_roots(const TRSProblem& t,
                                              int grid = 1024);

/// Builds a problem whose global minimizer is strict yet fails the standard
/// second-order sufficient condition: b lives in the span of the top
/// eigenvectors with weights rescaled so that
/// sum_j (u_j^T b / (lambda_j - lambda_1))^2 = 1.
TRSProblem generate_trs_hard_case(const Vector& lambda, const Matrix& u,
                                  const Vector& weights);

struct SoscReport {
  bool strict_global = false;
  bool sosc_holds = false;
  double mu = 0.0;
  Vector x;
  double value = 0.0;
};

/// Solves globally, decides uniqueness of the minimizer (strictness) and
/// evaluates the second-order sufficient condition on the tangent space.
SoscReport check_sosc_at_global(const TRSProblem& t, const SolveOptions& opts = {});

/// Convenience bundle for the command line front end.
struct TRSSolution {
  Vector global_x;
  double global_value;
  double mu_global;
  std::optional<TRSLocalNonGlobal> local_nonglobal;
  bool hard_case;  // multiplier pinned at -lambda_min(Q) with singular Hessian
};
TRSSolution solve_trs(const TRSProblem& t, const SolveOptions& opts = {});

}  // namespace qqopt
