#include "qqopt/qq2_local.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qqopt/qq1.hpp"

namespace qqopt {

namespace {

Matrix lagrangian_hessian(const QQ2Problem& p, double alpha, double beta) {
  return p.a0.mat() + alpha * p.a1.mat() + beta * p.a2.mat();
}

bool feasible_point(const QQ2Problem& p, const Vector& x, double tol) {
  if (std::abs(p.q1(x) - 1.0) > tol) return false;
  const double q2 = p.q2(x);
  if (p.mode == ConstraintMode::Inequality) return q2 <= 1.0 + tol;
  return std::abs(q2 - 1.0) <= tol;
}

}  // namespace

namespace detail {
Eigen::Vector2d damped_solve2(const Eigen::Matrix2d& m,
                              const Eigen::Vector2d& r);
}  // namespace detail
using detail::damped_solve2;

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Infeasible: return "Infeasible";
    case Verdict::InteriorGlobal: return "InteriorGlobal";
    case Verdict::InteriorNotLocal: return "InteriorNotLocal";
    case Verdict::GlobalBoundary: return "GlobalBoundary";
    case Verdict::StrictLocalNonGlobal: return "StrictLocalNonGlobal";
    case Verdict::NonStrictLocalNonGlobalCandidate:
      return "NonStrictLocalNonGlobalCandidate";
    case Verdict::NotLocalMinimizer: return "NotLocalMinimizer";
    case Verdict::LicqFailGlobal: return "LICQFailGlobal";
    case Verdict::LicqFailNotGlobal: return "LICQFailNotGlobal";
  }
  return "?";
}

KKTData compute_kkt(const QQ2Problem& p, const Vector& x, double tol) {
  if (x.size() != p.n()) {
    throw std::invalid_argument("compute_kkt: dimension mismatch");
  }
  if (std::abs(p.q1(x) - 1.0) > tol) {
    throw std::invalid_argument("compute_kkt: point violates q1(x) = 1");
  }
  const double q2 = p.q2(x);
  if (std::abs(q2 - 1.0) > tol) {
    if (p.mode == ConstraintMode::Inequality && q2 < 1.0) {
      throw std::invalid_argument(
          "compute_kkt: interior point; boundary KKT is not applicable");
    }
    throw std::invalid_argument("compute_kkt: point violates q2(x) = 1");
  }

  KKTData k;
  k.x = x;
  const Vector a1 = p.a1.mat() * x;
  const Vector a2 = p.a2.mat() * x;
  Eigen::Matrix2d gram;
  gram << a1.dot(a1), a1.dot(a2), a2.dot(a1), a2.dot(a2);
  const double gscale = std::max(1.0, a1.squaredNorm() + a2.squaredNorm());
  k.licq_gram_lambda_min =
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(gram, Eigen::EigenvaluesOnly)
          .eigenvalues()[0];
  k.licq_ok = k.licq_gram_lambda_min > tol * gscale;

  Matrix j(p.n(), 2);
  j.col(0) = a1;
  j.col(1) = a2;
  const Vector g0 = p.a0.mat() * x;
  const Eigen::Vector2d c =
      damped_solve2(gram, Eigen::Vector2d(-a1.dot(g0), -a2.dot(g0)));
  k.alpha = c[0];
  k.beta = c[1];
  const Vector resid = g0 + k.alpha * a1 + k.beta * a2;
  const double rscale = std::max(
      1.0, g0.norm() + std::abs(k.alpha) * a1.norm() + std::abs(k.beta) * a2.norm());
  k.stationarity_residual = resid.norm() / rscale;

  Eigen::HouseholderQR<Matrix> qr(j);
  const Matrix q = qr.householderQ();
  k.tangent_basis = q.rightCols(p.n() - 2);
  return k;
}

std::optional<NonStrictDirection> find_nonstrict_direction(
    const QQ2Problem& p, const Vector& x, const KKTData& kkt, double tol) {
  const Matrix g = lagrangian_hessian(p, kkt.alpha, kkt.beta);
  const Matrix& w = kkt.tangent_basis;
  if (w.cols() == 0) return std::nullopt;
  const Matrix h = w.transpose() * g * w;
  const double hscale = std::max(1.0, h.norm());
  const EigDecomp eh = sym_eig(h);
  if (eh.values[0] < -tol * hscale) return std::nullopt;  // not PSD

  // Null space of the projected Hessian, in tangent coordinates.
  int k = 0;
  for (int i = 0; i < eh.values.size(); ++i) {
    if (std::abs(eh.values[i]) <= tol * hscale) ++k;
  }
  if (k == 0) return std::nullopt;  // positive definite: strict case
  Matrix n0(w.cols(), k);
  int j = 0;
  for (int i = 0; i < eh.values.size(); ++i) {
    if (std::abs(eh.values[i]) <= tol * hscale) n0.col(j++) = eh.vectors.col(i);
  }

  // A zero of the form A2 - A1 restricted to that null space lies in the
  // span of its extreme eigenvectors.
  const Matrix b = w * n0;
  const Matrix q = b.transpose() * (p.a2.mat() - p.a1.mat()) * b;
  const double qscale = std::max(1.0, q.norm());
  const EigDecomp eq = sym_eig(q);
  const double lo = eq.values[0];
  const double hi = eq.values[eq.values.size() - 1];
  if (lo > tol * qscale || hi < -tol * qscale) return std::nullopt;

  Vector u;
  if (hi - lo <= 1e-15 * qscale) {
    u = eq.vectors.col(0);
  } else {
    const double w_lo = std::sqrt(std::max(0.0, hi / (hi - lo)));
    const double w_hi = std::sqrt(std::max(0.0, -lo / (hi - lo)));
    u = w_lo * eq.vectors.col(0) + w_hi * eq.vectors.col(eq.values.size() - 1);
  }
  Vector v_bar = b * u;
  v_bar.normalize();

  NonStrictDirection dir;
  dir.v_bar = canonical_sign(v_bar);
  dir.r_a1 = std::abs(v_bar.dot(p.a1.mat() * x));
  dir.r_a2 = std::abs(v_bar.dot(p.a2.mat() * x));
  dir.r_hess = std::abs(v_bar.dot(g * v_bar));
  dir.r_form = std::abs(v_bar.dot((p.a2.mat() - p.a1.mat()) * v_bar));
  return dir;
}

GlobalContext make_global_context(const QQ2Problem& p,
                                  const SolveOptions& opts) {
  GlobalContext ctx;
  try {
    ctx.solution = solve_qq2(p, opts);
    if (ctx.solution.status == Qq2Status::Global) {
      ctx.available = true;
      ctx.value = ctx.solution.value;
    } else {
      ctx.reason = "global solve status " +
                   std::to_string(static_cast<int>(ctx.solution.status)) +
                   ": " + ctx.solution.detail;
    }
  } catch (const std::exception& e) {
    ctx.reason = e.what();
  }
  return ctx;
}

namespace {

PointClassification classify_impl(const QQ2Problem& p, const Vector& x,
                                  double tol, const GlobalContext& ctx,
                                  const SolveOptions& opts) {
  PointClassification out;
  out.value = p.q0(x);
  if (ctx.available) out.global_value = ctx.value;

  if (!feasible_point(p, x, tol)) {
    out.verdict = Verdict::Infeasible;
    return out;
  }

  const auto require_global = [&]() -> double {
    if (!ctx.available) {
      throw SolveError("classify_point",
                       "global value needed but unavailable: " + ctx.reason);
    }
    return ctx.value;
  };
  const auto matches_global = [&](double v) {
    const double gv = require_global();
    return v <= gv + tol * std::max(1.0, std::abs(gv));
  };

  // Strictly inside the second constraint the problem is locally the
  // one-constraint problem, where local minimizers are global.
  if (p.mode == ConstraintMode::Inequality && p.q2(x) < 1.0 - tol) {
    const Qq1Verdict v = classify_qq1_point(QQ1Problem(p.a0, p.a1), x, tol);
    out.verdict = v == Qq1Verdict::Global ? Verdict::InteriorGlobal
                                          : Verdict::InteriorNotLocal;
    return out;
  }

  KKTData kkt = compute_kkt(p, x, tol);
  out.kkt = kkt;

  if (!kkt.licq_ok) {
    // With dependent constraint gradients a local minimizer must be global,
    // so the value comparison settles the verdict.
    out.verdict = matches_global(out.value) ? Verdict::LicqFailGlobal
                                            : Verdict::LicqFailNotGlobal;
    return out;
  }

  if (kkt.stationarity_residual > tol) {
    out.verdict = Verdict::NotLocalMinimizer;
    return out;
  }

  const Matrix g = lagrangian_hessian(p, kkt.alpha, kkt.beta);
  out.inertia_g = inertia(g, opts.tol_rank);
  const Matrix h = kkt.tangent_basis.transpose() * g * kkt.tangent_basis;
  const EigDecomp eh = sym_eig(h);
  out.projected_hessian_spectrum = eh.values;

  if (p.mode == ConstraintMode::Inequality && kkt.beta <= tol) {
    // Strict complementarity holds at every local non-global minimizer, so a
    // vanishing multiplier leaves only "global or not local".
    out.verdict = matches_global(out.value) ? Verdict::GlobalBoundary
                                            : Verdict::NotLocalMinimizer;
    return out;
  }

  const double lam_g = lambda_min(g);
  if (lam_g >= -tol * std::max(1.0, g.norm())) {
    out.verdict = Verdict::GlobalBoundary;  // PSD certificate in hand
    return out;
  }
  if (out.inertia_g->n_neg != 1) {
    // The Lagrangian Hessian has exactly one negative eigenvalue at any
    // local non-global minimizer.
    out.verdict = Verdict::NotLocalMinimizer;
    return out;
  }

  const double hscale = std::max(1.0, h.norm());
  const double wmin =
      eh.values.size() > 0 ? eh.values[0] : std::numeric_limits<double>::infinity();
  if (wmin > tol * hscale) {
    out.verdict = Verdict::StrictLocalNonGlobal;
    return out;
  }
  if (wmin >= -tol * hscale) {
    out.nonstrict = find_nonstrict_direction(p, x, kkt, tol);
    out.verdict = out.nonstrict ? Verdict::NonStrictLocalNonGlobalCandidate
                                : Verdict::NotLocalMinimizer;
    return out;
  }
  out.verdict = Verdict::NotLocalMinimizer;  // projected Hessian indefinite
  return out;
}

}  // namespace

PointClassification classify_point(const QQ2Problem& p, const Vector& x,
                                   double tol, const GlobalContext& ctx,
                                   const SolveOptions& opts) {
  return classify_impl(p, x, tol, ctx, opts);
}

PointClassification classify_point(const QQ2Problem& p, const Vector& x,
                                   double tol, const SolveOptions& opts) {
  const GlobalContext ctx = make_global_context(p, opts);
  return classify_impl(p, x, tol, ctx, opts);
}

std::vector<std::pair<Vector, PointClassification>> find_local_nonglobal(
    const QQ2Problem& p, int n_starts, std::uint64_t seed,
    const SolveOptions& opts, const MultistartOptions& ms) {
  if (p.n() < 3) {
    throw std::invalid_argument("find_local_nonglobal: dimension must be >= 3");
  }
  if (n_starts < 1) {
    throw std::invalid_argument("find_local_nonglobal: n_starts must be >= 1");
  }
  const Pencil2Result pr =
      find_definite_pencil2(p.a1, p.a2, opts.pencil_grid, opts.line_budget);
  if (!pr.found) {
    throw SolveError("find_local_nonglobal",
                     "a positive definite combination of A1, A2 is required");
  }

  const GlobalContext ctx = make_global_context(p, opts);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double grad_scale = std::max(1.0, p.a0.norm());

  std::vector<Vector> reps;
  int projected = 0;
  for (int s = 0; s < n_starts; ++s) {
    Vector x0(p.n());
    for (int i = 0; i < p.n(); ++i) x0[i] = normal(rng);
    auto proj = retract_to_manifold(p, x0);
    if (!proj) continue;
    ++projected;
    Vector x = *proj;

    for (int it = 0; it < ms.max_iters; ++it) {
      const Vector grad = 2.0 * (p.a0.mat() * x);
      const Vector t = tangent_project(p, x, grad);
      if (t.norm() <= ms.grad_tol * grad_scale) break;
      const Vector d = -t;
      double step = ms.step0;
      bool accepted = false;
      const double f0 = p.q0(x);
      for (int ls = 0; ls < 60; ++ls) {
        const auto cand = retract_to_manifold(p, Vector(x + step * d));
        if (cand && p.q0(*cand) <= f0 - ms.armijo_slope * step * t.squaredNorm()) {
          x = *cand;
          accepted = true;
          break;
        }
        step *= ms.shrink;
      }
      if (!accepted) break;
    }

    x = canonical_sign(x);
    bool dup = false;
    for (const auto& r : reps) {
      if (std::min((x - r).norm(), (x + r).norm()) <= ms.dedupe_dist) {
        dup = true;
        break;
      }
    }
    if (!dup) reps.push_back(x);
  }
  if (projected == 0) {
    throw SolveError("find_local_nonglobal",
                     "no start projected onto {q1 = 1, q2 = 1}; the manifold "
                     "may be empty");
  }

  std::vector<std::pair<Vector, PointClassification>> out;
  for (const auto& r : reps) {
    PointClassification cls;
    try {
      cls = classify_impl(p, r, opts.tol_psd, ctx, opts);
    } catch (const std::exception&) {
      continue;  // unclassifiable without a global value; never certified
    }
    if (cls.verdict == Verdict::StrictLocalNonGlobal ||
        cls.verdict == Verdict::NonStrictLocalNonGlobalCandidate) {
      out.emplace_back(r, cls);
      PointClassification mirrored = cls;
      if (mirrored.kkt) mirrored.kkt->x = -r;
      out.emplace_back(-r, mirrored);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second.value != b.second.value) return a.second.value < b.second.value;
    return std::lexicographical_compare(a.first.data(),
                                        a.first.data() + a.first.size(),
                                        b.first.data(),
                                        b.first.data() + b.first.size());
  });
  return out;
}

}  // namespace qqopt
