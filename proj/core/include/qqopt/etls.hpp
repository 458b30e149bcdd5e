#pragma once

#include <utility>

#include "qqopt/qq2.hpp"
#include "qqopt/qq2_global.hpp"
#include "qqopt/qq2_local.hpp"

namespace qqopt {

/// min ||Ax - b||^2 / (||x||^2 + 1) subject to ||Lx||^2 <= rho, with L of
/// full row rank and rho > 0.
struct ETLSProblem {
  ETLSProblem(Matrix a_, Vector b_, Matrix l_, double rho_)
      : a(std::move(a_)), b(std::move(b_)), l(std::move(l_)), rho(rho_) {
    if (a.rows() != b.size()) {
      throw std::invalid_argument("ETLSProblem: row count of A must match b");
    }
    if (l.cols() != a.cols()) {
      throw std::invalid_argument("ETLSProblem: L must have n columns");
    }
    if (!(rho > 0)) {
      throw std::invalid_argument("ETLSProblem: rho must be positive");
    }
    if (!a.allFinite() || !b.allFinite() || !l.allFinite()) {
      throw std::invalid_argument("ETLSProblem: entries must be finite");
    }
  }
  Matrix a;
  Vector b;
  Matrix l;
  double rho;
  int n() const { return static_cast<int>(a.cols()); }
  double objective(const Vector& x) const {
    return (a * x - b).squaredNorm() / (x.squaredNorm() + 1.0);
  }
};

/// The substitution y = x / sqrt(1 + x^T x), z = 1 / sqrt(1 + x^T x) turns
/// the fractional objective into ||Ay - bz||^2 on the sphere y^T y + z^2 = 1;
/// the regularizer becomes (y^T y + z^2) + (y^T L^T L y - rho z^2) <= 1 so a
/// definite combination exists with the identity alone.
QQ2Problem etls_to_qq2(const ETLSProblem& e);

/// Existence condition: r = n, or the bottom eigenvalue of the augmented
/// matrix projected onto null(L) sits strictly below the bottom eigenvalue
/// of the projected A^T A.
bool etls_existence_assumption(const ETLSProblem& e);

struct ETLSSolution {
  Vector x;
  double value;
  Vector yz;  // minimizer of the sphere formulation, last entry z != 0
  GlobalCertificate certificate;
};

ETLSSolution solve_etls(const ETLSProblem& e, const SolveOptions& opts = {});

/// Maps x through the sphere substitution and classifies there.
PointClassification classify_etls_point(const ETLSProblem& e, const Vector& x,
                                        double tol,
                                        const SolveOptions& opts = {});

}  // namespace qqopt
