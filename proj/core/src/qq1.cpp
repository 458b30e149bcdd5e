#include "qqopt/qq1.hpp"

#include <cmath>

#include "qqopt/pencil.hpp"

namespace qqopt {

bool qq1_feasible(const SymMat& a1) {
  const EigDecomp e = sym_eig(a1);
  return e.values[e.values.size() - 1] > 1e-12;
}

QQ1Solution solve_qq1(const QQ1Problem& p, double tol_rank) {
  QQ1Solution sol;
  if (!qq1_feasible(p.a1)) {
    sol.status = Qq1Status::Infeasible;
    return sol;
  }

  const Matrix& a0 = p.a0.mat();
  const Matrix& a1 = p.a1.mat();

  // Left endpoint of {alpha : A0 + alpha A1 PSD}; empty interval means the
  // infimum is -inf (no dual certificate exists).
  const auto alpha_opt = min_shift_psd(a0, a1);
  if (!alpha_opt) {
    sol.status = Qq1Status::Unbounded;
    return sol;
  }
  const double alpha = *alpha_opt;

  const Matrix shifted = a0 + alpha * a1;
  Matrix null_basis = nullspace_basis(shifted, tol_rank);
  if (null_basis.cols() == 0) {
    // Fall back to the bottom eigenvector; bisection puts it within noise
    // of zero.
    const EigDecomp e = sym_eig(shifted);
    null_basis = e.vectors.col(0);
  }

  // Maximize q1 over the null space; positive maximum means the infimum is
  // attained there after scaling to q1 = 1.
  const Matrix m1 = null_basis.transpose() * a1 * null_basis;
  const EigDecomp em = sym_eig(m1);
  const double q1_max = em.values[em.values.size() - 1];
  sol.alpha = alpha;
  sol.value = -alpha;
  sol.lambda_min = lambda_min(shifted);
  if (q1_max <= 1e-10) {
    sol.status = Qq1Status::Unattained;
    return sol;
  }
  const Vector y = em.vectors.col(em.values.size() - 1);
  Vector x = null_basis * y;
  x /= std::sqrt(p.a1.quad(x));
  sol.x_star = canonical_sign(x);
  sol.status = Qq1Status::Attained;
  return sol;
}

Qq1Verdict classify_qq1_point(const QQ1Problem& p, const Vector& x,
                              double tol) {
  if (x.size() != p.n()) {
    throw std::invalid_argument("classify_qq1_point: dimension mismatch");
  }
  if (std::abs(p.a1.quad(x) - 1.0) > tol) return Qq1Verdict::Infeasible;

  // Stationarity pins the multiplier: x^T (A0 + alpha A1) x = 0 with
  // q1(x) = 1 forces alpha = -q0(x).
  const double q0 = p.a0.quad(x);
  const Vector resid = p.a0.mat() * x - q0 * (p.a1.mat() * x);
  const double scale =
      (p.a0.norm() + std::abs(q0) * p.a1.norm()) * x.norm() + 1e-300;
  if (resid.norm() > tol * std::max(1.0, scale)) {
    return Qq1Verdict::NotStationary;
  }

  const QQ1Solution sol = solve_qq1(p);
  if (sol.status == Qq1Status::Unbounded) return Qq1Verdict::StationaryNotGlobal;
  if (q0 <= sol.value + tol * std::max(1.0, std::abs(sol.value))) {
    return Qq1Verdict::Global;
  }
  return Qq1Verdict::StationaryNotGlobal;
}

QQ1Solution solve_qc1qp_ineq(const SymMat& a0, const SymMat& a1) {
  if (a0.n() != a1.n()) {
    throw std::invalid_argument("solve_qc1qp_ineq: dimension mismatch");
  }
  QQ1Solution sol;
  const double lam0 = lambda_min(a0.mat());
  if (lam0 >= -1e-12 * std::max(1.0, a0.norm())) {
    sol.status = Qq1Status::Attained;
    sol.x_star = Vector::Zero(a0.n());
    sol.alpha = 0.0;
    sol.value = 0.0;
    sol.lambda_min = lam0;
    return sol;
  }
  // A0 has negative curvature. If the constraint cannot be active the
  // problem is unconstrained and unbounded.
  if (!qq1_feasible(a1)) {
    sol.status = Qq1Status::Unbounded;
    return sol;
  }
  QQ1Solution boundary = solve_qq1(QQ1Problem(a0, a1));
  if (boundary.status == Qq1Status::Unbounded) return boundary;
  // KKT for the inequality needs alpha >= 0. A negative multiplier means
  // every negative-curvature direction of A0 has q1 <= 0, i.e. a feasible
  // unbounded ray.
  if (boundary.alpha < -1e-12 * std::max(1.0, a0.norm())) {
    sol.status = Qq1Status::Unbounded;
    return sol;
  }
  return boundary;
}

std::pair<double, Vector> solve_rq(const SymMat& a0, const SymMat& a1) {
  if (a0.n() != a1.n()) {
    throw std::invalid_argument("solve_rq: dimension mismatch");
  }
  Eigen::LLT<Matrix> llt(a1.mat());
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("solve_rq: A1 must be positive definite");
  }
  const Matrix l = llt.matrixL();
  const Matrix t = l.triangularView<Eigen::Lower>().solve(
      Matrix(l.triangularView<Eigen::Lower>().solve(a0.mat()).transpose()));
  const EigDecomp e = sym_eig(Matrix(0.5 * (t + t.transpose())));
  const Vector u = e.vectors.col(0);
  Vector x = l.transpose().triangularView<Eigen::Upper>().solve(u);
  x /= std::sqrt(a1.quad(x));
  return {e.values[0], canonical_sign(x)};
}

TlsSolution solve_tls(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("solve_tls: row count of A must match b");
  }
  const int n = static_cast<int>(a.cols());
  Matrix m(n + 1, n + 1);
  m.topLeftCorner(n, n) = a.transpose() * a;
  m.topRightCorner(n, 1) = -a.transpose() * b;
  m.bottomLeftCorner(1, n) = m.topRightCorner(n, 1).transpose();
  m(n, n) = b.squaredNorm();

  const EigDecomp e = sym_eig(m);
  const double lam = e.values[0];
  const double cluster = 1e-9 * std::max(1.0, m.norm());

  // Pick the eigenvector in the bottom eigenspace with the largest last
  // component; if the whole eigenspace is orthogonal to it, the minimizing
  // sequence runs off to infinity.
  Vector w = Vector::Zero(e.values.size());
  int d = 0;
  for (int k = 0; k < e.values.size(); ++k) {
    if (e.values[k] - lam <= cluster) {
      w[k] = e.vectors(n, k);
      ++d;
    }
  }
  if (w.norm() <= 1e-10) {
    throw std::runtime_error("TLS solution at infinity");
  }
  Vector v = Vector::Zero(n + 1);
  for (int k = 0; k < e.values.size(); ++k) {
    if (w[k] != 0.0) v += w[k] * e.vectors.col(k);
  }
  v.normalize();
  return TlsSolution{v.head(n) / v[n], lam};
}

Vector ellipsoid_descent(const SymMat& a0, const SymMat& a1, Vector x0,
                         double grad_tol, int max_iters) {
  Eigen::LLT<Matrix> llt(a1.mat());
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("ellipsoid_descent: A1 must be positive definite");
  }
  const auto retract = [&](const Vector& y) {
    return Vector(y / std::sqrt(a1.quad(y)));
  };
  Vector x = retract(x0);
  const double tol = grad_tol * std::max(1.0, a0.norm());
  for (int it = 0; it < max_iters; ++it) {
    const Vector grad = 2.0 * (a0.mat() * x);
    const Vector c = 2.0 * (a1.mat() * x);
    const Vector tangent = grad - (grad.dot(c) / c.squaredNorm()) * c;
    if (tangent.norm() <= tol) break;
    const Vector d = -tangent;
    double s = 1.0;
    const double q0 = a0.quad(x);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector cand = retract(x + s * d);
      if (a0.quad(cand) <= q0 - 1e-4 * s * tangent.squaredNorm()) {
        x = cand;
        moved = true;
        break;
      }
      s *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

}  // namespace qqopt
