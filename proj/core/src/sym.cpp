#include "qqopt/sym.hpp"

#include <cmath>

namespace qqopt {

SymMat::SymMat(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("SymMat: matrix must be square");
  }
  if (m.rows() < 1) {
    throw std::invalid_argument("SymMat: dimension must be >= 1");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument("SymMat: entries must be finite");
  }
  m_ = 0.5 * (m + m.transpose());
}

EigDecomp sym_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("sym_eig: eigensolver failed to converge");
  }
  return EigDecomp{es.eigenvalues(), es.eigenvectors()};
}

EigDecomp sym_eig(const SymMat& m) { return sym_eig(m.mat()); }

Inertia inertia(const Matrix& m, double tol) {
  if (tol <= 0) {
    throw std::invalid_argument("inertia: tol must be positive");
  }
  const EigDecomp e = sym_eig(m);
  const double thresh = tol * std::max(1.0, m.norm());
  Inertia inr;
  inr.tol = thresh;
  for (int k = 0; k < e.values.size(); ++k) {
    if (std::abs(e.values[k]) <= thresh) {
      ++inr.n_zero;
    } else if (e.values[k] < 0) {
      ++inr.n_neg;
    } else {
      ++inr.n_pos;
    }
  }
  return inr;
}

Inertia inertia(const SymMat& m, double tol) { return inertia(m.mat(), tol); }

Matrix nullspace_basis(const Matrix& m, double tol) {
  const EigDecomp e = sym_eig(m);
  const double thresh = tol * std::max(1.0, m.norm());
  int d = 0;
  for (int k = 0; k < e.values.size(); ++k) {
    if (std::abs(e.values[k]) <= thresh) ++d;
  }
  Matrix basis(m.rows(), d);
  int j = 0;
  for (int k = 0; k < e.values.size(); ++k) {
    if (std::abs(e.values[k]) <= thresh) basis.col(j++) = e.vectors.col(k);
  }
  return basis;
}

Matrix nullspace_basis(const SymMat& m, double tol) {
  return nullspace_basis(m.mat(), tol);
}

double lambda_min(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

Vector canonical_sign(Vector v) {
  int imax = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  }
  if (v.size() > 0 && v[imax] < 0) v = -v;
  return v;
}

}  // namespace qqopt
