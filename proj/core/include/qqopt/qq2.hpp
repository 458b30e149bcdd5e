#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "qqopt/sym.hpp"

namespace qqopt {

enum class ConstraintMode { Inequality, Equality };

/// min q0(x) subject to q1(x) = 1 and q2(x) <= 1 (Inequality mode) or
/// q2(x) = 1 (Equality mode).
struct QQ2Problem {
  QQ2Problem(SymMat a0_, SymMat a1_, SymMat a2_, ConstraintMode mode_)
      : a0(std::move(a0_)),
        a1(std::move(a1_)),
        a2(std::move(a2_)),
        mode(mode_) {
    if (a0.n() != a1.n() || a0.n() != a2.n()) {
      throw std::invalid_argument("QQ2Problem: dimension mismatch");
    }
    if (a0.n() < 2) {
      throw std::invalid_argument("QQ2Problem: dimension must be >= 2");
    }
  }

  SymMat a0;
  SymMat a1;
  SymMat a2;
  ConstraintMode mode;

  int n() const { return a0.n(); }
  double q0(const Vector& x) const { return a0.quad(x); }
  double q1(const Vector& x) const { return a1.quad(x); }
  double q2(const Vector& x) const { return a2.quad(x); }
  double scale() const { return 1.0 + a0.norm() + a1.norm() + a2.norm(); }
};

/// Newton projection onto {q1 = 1, q2 = 1} along span{A1 x, A2 x}, with
/// residual backtracking. Empty on divergence.
std::optional<Vector> retract_to_manifold(const QQ2Problem& p, Vector x,
                                          int max_iters = 60);

/// Component of v orthogonal to the active constraint gradients
/// {A1 x, A2 x} (least-squares projection, rank-tolerant).
Vector tangent_project(const QQ2Problem& p, const Vector& x, const Vector& v);

struct SolveOptions {
  double tol_feas = 1e-9;
  double tol_psd = 1e-7;
  double tol_rank = 1e-8;
  int pencil_grid = 720;       // unit-circle resolution for the (C-type) search
  int line_budget = 120;       // golden-section iterations per 1-D maximization
  int dual_max_iters = 500;    // cutting-plane budget
  double dual_gap_tol = 1e-9;  // relative duality-gap target
  std::uint64_t seed = 7;      // seeds the null-space sampling fallback
  int recover_samples = 10000;
};

}  // namespace qqopt
