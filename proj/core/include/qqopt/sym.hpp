#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace qqopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Construction symmetrizes via (M + M^T)/2 and
/// rejects non-finite entries, so downstream code can assume exact symmetry.
class SymMat {
 public:
  explicit SymMat(const Matrix& m);

  static SymMat identity(int n) { return SymMat(Matrix::Identity(n, n)); }
  static SymMat zero(int n) { return SymMat(Matrix::Zero(n, n)); }
  static SymMat diag(const Vector& d) {
    return SymMat(Matrix(d.asDiagonal()));
  }

  int n() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  /// x^T M x
  double quad(const Vector& x) const { return x.dot(m_ * x); }
  double norm() const { return m_.norm(); }

 private:
  Matrix m_;
};

struct EigDecomp {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns, vectors.col(k) pairs with values[k]
};

struct Inertia {
  int n_neg = 0;
  int n_zero = 0;
  int n_pos = 0;
  double tol = 0.0;  // zero threshold actually applied (absolute)
};

EigDecomp sym_eig(const SymMat& m);
EigDecomp sym_eig(const Matrix& m);

/// Eigenvalues with |lambda| <= tol * max(1, ||M||) count as zero.
Inertia inertia(const SymMat& m, double tol = 1e-8);
Inertia inertia(const Matrix& m, double tol = 1e-8);

/// Orthonormal basis (n x d, d possibly 0) of the eigenspace belonging to
/// eigenvalues with |lambda| <= tol * max(1, ||M||).
Matrix nullspace_basis(const SymMat& m, double tol = 1e-8);
Matrix nullspace_basis(const Matrix& m, double tol = 1e-8);

double lambda_min(const Matrix& m);

/// Canonical sign for vectors determined only up to +-1: the entry of
/// largest magnitude is made positive.
Vector canonical_sign(Vector v);

}  // namespace qqopt
