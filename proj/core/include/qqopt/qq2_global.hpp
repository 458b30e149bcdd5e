#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qqopt/pencil.hpp"
#include "qqopt/qq2.hpp"

namespace qqopt {

/// Witnesses for the solver's standing hypotheses: a positive definite
/// combination of the constraint matrices, a feasible point strictly inside
/// the second constraint, and one strictly outside it.
struct AssumptionReport {
  std::optional<std::pair<double, double>> definite_combination;  // (mu1, mu2)
  double pencil_best_lambda_min = 0.0;
  bool pencil_definitely_none = false;
  int pencil_resolution = 0;

  std::optional<Vector> interior_witness;  // q1 = 1, q2 < 1
  double q2_min = 0.0;                     // inf of q2 over {q1 = 1}
  bool q2_min_is_bound = true;             // false when that inf is -inf

  std::optional<Vector> exterior_witness;  // q1 = 1, q2 > 1
  double q2_max = 0.0;                     // sup of q2 over {q1 = 1}
  bool q2_max_is_bound = true;             // false when that sup is +inf

  bool a2_minus_a1_indefinite = false;
  std::string notes;
};

AssumptionReport check_assumptions(const QQ2Problem& p,
                                   const SolveOptions& opts = {});

enum class Compactness {
  CompactEquality,
  CompactInequality,
  NotCompact,
  UnknownAtResolution,
  EmptyFeasible,
};

struct CompactnessReport {
  Compactness result;
  double mu1 = 0.0;  // definite-combination direction when compact
  double mu2 = 0.0;
  double achieved_lambda_min = 0.0;
  int resolution = 0;
  std::string notes;
};

CompactnessReport check_compactness(const QQ2Problem& p,
                                    const SolveOptions& opts = {});

enum class DualStatus { Optimal, NoFeasiblePoint, Unbounded };

struct DualIterate {
  double alpha;
  double beta;
  double lambda_min;
  double objective;  // -alpha - beta
  bool feasible;
};

struct DualResult {
  DualStatus status = DualStatus::Optimal;
  double alpha = 0.0;  // best dual-feasible multipliers
  double beta = 0.0;
  double value = 0.0;  // -alpha - beta at them
  double lambda_min = 0.0;
  double gap = 0.0;  // certified upper bound minus value at termination
  int iterations = 0;
  std::vector<DualIterate> trace;
};

/// Maximizes -alpha - beta over {(alpha, beta) : A0 + alpha A1 + beta A2 PSD}
/// (beta >= 0 in Inequality mode) by cutting planes with supergradient cuts
/// (v^T A1 v, v^T A2 v) at a minimal unit eigenvector v, then tightens the
/// optimal level by bisection. Requires a definite combination of A1, A2.
DualResult solve_dual(const QQ2Problem& p, const SolveOptions& opts = {});

/// Pulls a feasible minimizer out of the null space of
/// G = A0 + alpha A1 + beta A2. Throws on inconsistent certificates.
Vector recover_primal(const QQ2Problem& p, double alpha, double beta,
                      double tol, const SolveOptions& opts = {});

struct CertificateCheck {
  bool stationarity = false;
  bool feasibility = false;
  bool complementarity = false;
  bool multiplier_sign = false;
  bool psd = false;
  bool pass = false;
  double stationarity_residual = 0.0;
  double q1_error = 0.0;
  double q2_violation = 0.0;
  double complementarity_residual = 0.0;
  double lambda_min_g = 0.0;
};

CertificateCheck verify_global_certificate(const QQ2Problem& p,
                                           const Vector& x, double alpha,
                                           double beta, double tol);

struct GlobalCertificate {
  Vector x_star;
  double alpha = 0.0;
  double beta = 0.0;
  double value = 0.0;
  double lambda_min_g = 0.0;
};

enum class Qq2Status { Global, Infeasible, Unbounded, Unattained, AssumptionFailure };

struct Qq2Solution {
  Qq2Status status = Qq2Status::AssumptionFailure;
  Vector x_star;
  double value = 0.0;
  GlobalCertificate certificate;
  AssumptionReport assumptions;
  DualResult dual;
  CertificateCheck check;
  bool reduced_to_qq1 = false;  // second constraint inactive on {q1 = 1}
  std::string detail;
};

/// Orchestrates assumption checks, the dual solve, primal recovery and
/// certificate verification. Requires n >= 3.
Qq2Solution solve_qq2(const QQ2Problem& p, const SolveOptions& opts = {});

/// Error carrying the pipeline stage that failed.
struct SolveError : std::runtime_error {
  SolveError(std::string stage_, const std::string& what_)
      : std::runtime_error(stage_ + ": " + what_), stage(std::move(stage_)) {}
  std::string stage;
};

}  // namespace qqopt
