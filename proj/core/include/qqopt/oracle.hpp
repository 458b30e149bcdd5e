#pragma once

#include <cstdint>
#include <optional>

#include "qqopt/qq2.hpp"

namespace qqopt {

struct OracleReport {
  double value = 0.0;
  Vector argmin;          // re-validated feasible sample
  long n_feasible = 0;
  double resolution = 0;  // angular step in radians
  /// First-order bound on the objective error of the grid minimum for
  /// compact instances; conservative.
  double error_bound = 0.0;
};

/// Brute-force direction enumeration on a spherical-coordinate grid,
/// feasibility filtering, and a plain minimum. Guarded to n <= 4.
/// In Equality mode the feasibility band defaults to
/// 10 * resolution * max(1, ||A2||); `feas_band` overrides it (used by the
/// nested-grid refinement property). `jobs` partitions the outer loop; the
/// min-reduction is order-independent, so results are identical for any job
/// count.
OracleReport oracle_global(const QQ2Problem& p, double resolution,
                           std::optional<double> feas_band = std::nullopt,
                           int jobs = 1);

struct LocalProbeReport {
  bool is_local_min = false;
  double best_violation = 0.0;  // largest objective drop found (>= 0)
  int retraction_failures = 0;
  int n_probed = 0;
};

/// Samples tangent perturbations of norm <= radius, retracts them onto
/// {q1 = 1, q2 = 1} and compares objectives.
LocalProbeReport oracle_local_probe(const QQ2Problem& p, const Vector& x,
                                    double radius, int n_samples,
                                    std::uint64_t seed);

/// Max relative error of the analytic gradients 2 A_i x against central
/// finite differences (exact for quadratics up to roundoff).
double fd_check(const QQ2Problem& p, const Vector& x);

}  // namespace qqopt
