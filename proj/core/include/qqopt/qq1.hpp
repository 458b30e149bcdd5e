#pragma once

#include <optional>
#include <utility>

#include "qqopt/sym.hpp"

namespace qqopt {

/// min q0(x) subject to q1(x) = 1, with q_i(x) = x^T A_i x.
struct QQ1Problem {
  QQ1Problem(SymMat a0_, SymMat a1_) : a0(std::move(a0_)), a1(std::move(a1_)) {
    if (a0.n() != a1.n()) {
      throw std::invalid_argument("QQ1Problem: dimension mismatch");
    }
  }
  SymMat a0;
  SymMat a1;
  int n() const { return a0.n(); }
};

enum class Qq1Status { Attained, Unbounded, Unattained, Infeasible };

struct QQ1Solution {
  Qq1Status status = Qq1Status::Infeasible;
  Vector x_star;           // q1(x_star) = 1 when attained
  double alpha = 0.0;      // multiplier; A0 + alpha A1 is PSD and singular
  double value = 0.0;      // = -alpha when the status carries a value
  double lambda_min = 0.0; // of A0 + alpha A1, evidence for the certificate
};

/// The constraint q1(x) = 1 is satisfiable iff A1 has a positive direction.
bool qq1_feasible(const SymMat& a1);

/// The multiplier is the left endpoint of the interval where A0 + alpha A1
/// is PSD, located by bisection on the concave map alpha -> lambda_min.
/// The minimizer is recovered from the null space at that endpoint.
QQ1Solution solve_qq1(const QQ1Problem& p, double tol_rank = 1e-8);

enum class Qq1Verdict { Infeasible, NotStationary, StationaryNotGlobal, Global };

/// Every local minimizer is global here, so stationary non-global points are
/// saddles or maxima and get their own verdict.
Qq1Verdict classify_qq1_point(const QQ1Problem& p, const Vector& x, double tol);

/// min q0(x) subject to q1(x) <= 1.
QQ1Solution solve_qc1qp_ineq(const SymMat& a0, const SymMat& a1);

/// Generalized Rayleigh quotient minimum for positive definite A1, via
/// congruence reduction to an ordinary symmetric eigenproblem. The vector is
/// normalized to q1 = 1.
std::pair<double, Vector> solve_rq(const SymMat& a0, const SymMat& a1);

struct TlsSolution {
  Vector x;
  double value;  // min ||Ax - b||^2 / (||x||^2 + 1)
};

/// Total least squares via the homogenized sphere problem: the value is the
/// smallest eigenvalue of the augmented matrix. Throws when every minimizing
/// eigenvector has zero last component ("TLS solution at infinity").
TlsSolution solve_tls(const Matrix& a, const Vector& b);

/// Projected-gradient descent on the ellipsoid {q1 = 1} (A1 positive
/// definite). Deterministic given x0; used to probe the no-local-non-global
/// property. Returns the terminal point.
Vector ellipsoid_descent(const SymMat& a0, const SymMat& a1, Vector x0,
                         double grad_tol = 1e-9, int max_iters = 5000);

}  // namespace qqopt
