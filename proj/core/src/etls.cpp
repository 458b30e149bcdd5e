#include "qqopt/etls.hpp"

#include <cmath>
#include <random>

namespace qqopt {

namespace {

/// Orthonormal basis of null(L) for a full-row-rank wide matrix.
Matrix null_basis_of(const Matrix& l) {
  Eigen::JacobiSVD<Matrix> svd(l, Eigen::ComputeFullV);
  const int n = static_cast<int>(l.cols());
  const int r = static_cast<int>(l.rows());
  const double smin = svd.singularValues()[r - 1];
  const double smax = svd.singularValues()[0];
  if (smin <= 1e-10 * std::max(1.0, smax)) {
    throw std::invalid_argument("ETLS: L must have full row rank");
  }
  return svd.matrixV().rightCols(n - r);
}

}  // namespace

QQ2Problem etls_to_qq2(const ETLSProblem& e) {
  const int n = e.n();
  Matrix a0 = Matrix::Zero(n + 1, n + 1);
  a0.topLeftCorner(n, n) = e.a.transpose() * e.a;
  a0.topRightCorner(n, 1) = -e.a.transpose() * e.b;
  a0.bottomLeftCorner(1, n) = a0.topRightCorner(n, 1).transpose();
  a0(n, n) = e.b.squaredNorm();

  Matrix a2 = Matrix::Identity(n + 1, n + 1);
  a2.topLeftCorner(n, n) += e.l.transpose() * e.l;
  a2(n, n) = 1.0 - e.rho;

  return QQ2Problem(SymMat(a0), SymMat::identity(n + 1), SymMat(a2),
                    ConstraintMode::Inequality);
}

bool etls_existence_assumption(const ETLSProblem& e) {
  const int r = static_cast<int>(e.l.rows());
  if (r == e.n()) {
    null_basis_of(e.l);  // full-row-rank validation
    return true;
  }
  const Matrix f = null_basis_of(e.l);
  const Matrix af = e.a * f;
  const int k = static_cast<int>(f.cols());
  Matrix m(k + 1, k + 1);
  m.topLeftCorner(k, k) = af.transpose() * af;
  m.topRightCorner(k, 1) = af.transpose() * e.b;
  m.bottomLeftCorner(1, k) = m.topRightCorner(k, 1).transpose();
  m(k, k) = e.b.squaredNorm();
  return lambda_min(m) < lambda_min(Matrix(af.transpose() * af));
}

ETLSSolution solve_etls(const ETLSProblem& e, const SolveOptions& opts) {
  if (e.n() < 2) {
    throw std::invalid_argument("solve_etls: n must be >= 2");
  }
  if (!etls_existence_assumption(e)) {
    throw SolveError("solve_etls", "existence assumption fails");
  }
  const QQ2Problem q = etls_to_qq2(e);
  const Qq2Solution sol = solve_qq2(q, opts);
  if (sol.status != Qq2Status::Global) {
    throw SolveError("solve_etls",
                     "sphere formulation solve failed: " + sol.detail);
  }
  Vector yz = sol.x_star;
  const int n = e.n();
  if (std::abs(yz[n]) <= 1e-10) {
    // A minimizer with z = 0 contradicts the existence assumption; search
    // the certificate null space for one with z != 0.
    const Matrix g = q.a0.mat() + sol.certificate.alpha * q.a1.mat() +
                     sol.certificate.beta * q.a2.mat();
    const Matrix basis = nullspace_basis(g, opts.tol_rank);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double best_z = std::abs(yz[n]);
    for (int s = 0; s < opts.recover_samples && basis.cols() > 0; ++s) {
      Vector c(basis.cols());
      for (int i = 0; i < c.size(); ++i) c[i] = normal(rng);
      Vector cand = basis * c;
      const double s1 = q.q1(cand);
      if (s1 <= 1e-12) continue;
      cand /= std::sqrt(s1);
      if (q.q2(cand) > 1.0 + 1e-9) continue;
      if (std::abs(q.q0(cand) - sol.value) > 1e-7 * q.scale()) continue;
      if (std::abs(cand[n]) > best_z) {
        best_z = std::abs(cand[n]);
        yz = cand;
      }
    }
    if (std::abs(yz[n]) <= 1e-10) {
      throw SolveError("solve_etls",
                       "contradiction: minimizer with z = 0 despite the "
                       "existence assumption");
    }
  }
  if (yz[n] < 0) yz = -yz;

  ETLSSolution out;
  out.yz = yz;
  out.x = yz.head(n) / yz[n];
  out.value = q.q0(yz);
  out.certificate = sol.certificate;
  out.certificate.x_star = yz;
  return out;
}

PointClassification classify_etls_point(const ETLSProblem& e, const Vector& x,
                                        double tol, const SolveOptions& opts) {
  if (x.size() != e.n()) {
    throw std::invalid_argument("classify_etls_point: dimension mismatch");
  }
  PointClassification out;
  if ((e.l * x).squaredNorm() > e.rho * (1.0 + tol) + tol) {
    out.verdict = Verdict::Infeasible;
    out.value = e.objective(x);
    return out;
  }
  const double z = 1.0 / std::sqrt(1.0 + x.squaredNorm());
  Vector yz(e.n() + 1);
  yz << x * z, z;
  return classify_point(etls_to_qq2(e), yz, tol, opts);
}

}  // namespace qqopt
