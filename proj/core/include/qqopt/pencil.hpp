#pragma once

#include <limits>
#include <optional>

#include "qqopt/sym.hpp"

namespace qqopt {

struct PencilCertificate {
  Vector mu;                  // coefficient vector, length 1 or 2
  double lambda_min_achieved; // > 0, re-evaluates to this value
};

struct ShiftResult {
  double mu;
  PencilCertificate certificate;
};

/// Result of the bracketed golden-section maximization of the concave map
/// t -> lambda_min(C + t D), optionally restricted to t >= lo.
struct LineMax {
  double t = 0;
  double value = -std::numeric_limits<double>::infinity();
};

LineMax max_lambda_min_on_line(
    const Matrix& c, const Matrix& d,
    double lo = -std::numeric_limits<double>::infinity(), int budget = 200);

/// Searches for mu with A + mu B positive definite. Empty when the maximized
/// lambda_min over mu is <= 0 within tolerance.
std::optional<ShiftResult> find_definite_shift(const SymMat& a, const SymMat& b,
                                               int budget = 200);

/// Left endpoint of the interval {t : C + t D is PSD}, located by bisection
/// on the concave map t -> lambda_min(C + t D). Empty when the interval is.
/// Requires lambda_max(D) > 0 so the map decays for t -> -inf.
std::optional<double> min_shift_psd(const Matrix& c, const Matrix& d,
                                    int budget = 200);

struct Pencil2Result {
  bool found = false;
  double mu1 = 0.0;
  double mu2 = 0.0;  // (mu1, mu2) has unit norm when found
  std::optional<PencilCertificate> certificate;
  /// Best lambda_min(mu1 A1 + mu2 A2) seen over the searched circle.
  double best_lambda_min = -std::numeric_limits<double>::infinity();
  int grid_resolution = 0;
  /// True when a Lipschitz argument over the grid proves no positive
  /// definite combination exists. When found == false and this is false,
  /// the outcome is only "not found at this resolution".
  bool definitely_none = false;
};

/// Grid of `grid` directions on the unit circle followed by golden-section
/// refinement of the best bracket. The set of valid directions is an open
/// arc, so arcs wider than 2*pi/grid are always detected.
Pencil2Result find_definite_pencil2(const SymMat& a1, const SymMat& a2,
                                    int grid = 720, int budget = 200);

struct CongruenceDiag {
  Matrix p;   // invertible; P^T (mu1 A1 + mu2 A2) P = I
  Vector d1;  // diag(P^T A1 P)
  Vector d2;  // diag(P^T A2 P)
};

/// Requires mu1 A1 + mu2 A2 positive definite; throws otherwise.
CongruenceDiag congruence_diagonalize(const SymMat& a1, const SymMat& a2,
                                      double mu1, double mu2);

}  // namespace qqopt
