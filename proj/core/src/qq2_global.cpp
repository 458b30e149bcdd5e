#include "qqopt/qq2_global.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qqopt/qq1.hpp"

namespace qqopt {

namespace detail {
Eigen::Vector2d damped_solve2(const Eigen::Matrix2d& m,
                              const Eigen::Vector2d& r);
}  // namespace detail

namespace {

/// Incremental two-variable LP: maximize -(x + y) over an intersection of
/// half planes a x + b y <= c. When a new half plane cuts off the current
/// optimum, the new optimum lies on its boundary line and is found by a 1-D
/// pass over the existing planes.
class TwoVarLP {
 public:
  TwoVarLP(double x0, double y0) : x_(x0), y_(y0) {}

  bool add(double a, double b, double c) {
    const double nrm = std::hypot(a, b);
    if (nrm < 1e-300) {
      if (c < -1e-12) infeasible_ = true;  // 0 <= c violated
      return !infeasible_;
    }
    a /= nrm;
    b /= nrm;
    c /= nrm;
    if (infeasible_) return false;
    if (a * x_ + b * y_ <= c + 1e-12 * (1.0 + std::abs(c))) {
      planes_.push_back({a, b, c});
      return true;
    }
    // Re-optimize on the boundary line of the new plane.
    const double px = a * c;
    const double py = b * c;
    const double dx = -b;
    const double dy = a;
    double tlo = -std::numeric_limits<double>::infinity();
    double thi = std::numeric_limits<double>::infinity();
    for (const auto& h : planes_) {
      const double coef = h.a * dx + h.b * dy;
      const double rhs = h.c - (h.a * px + h.b * py);
      if (std::abs(coef) <= 1e-14) {
        if (rhs < -1e-9 * (1.0 + std::abs(h.c))) {
          infeasible_ = true;
          return false;
        }
      } else if (coef > 0) {
        thi = std::min(thi, rhs / coef);
      } else {
        tlo = std::max(tlo, rhs / coef);
      }
    }
    if (tlo > thi + 1e-9) {
      infeasible_ = true;
      return false;
    }
    const double slope = -(dx + dy);  // d/dt of the objective -(x + y)
    const double t = (slope > 0) ? thi : tlo;
    if (!std::isfinite(t)) {
      infeasible_ = true;  // unbounded line segment: box planes missing
      return false;
    }
    x_ = px + t * dx;
    y_ = py + t * dy;
    planes_.push_back({a, b, c});
    return true;
  }

  bool feasible() const { return !infeasible_; }
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  struct Plane {
    double a, b, c;
  };
  std::vector<Plane> planes_;
  double x_, y_;
  bool infeasible_ = false;
};

struct Cut {
  double a, b, c;  // a alpha + b beta <= c
};

Matrix lagrangian_hessian(const QQ2Problem& p, double alpha, double beta) {
  return p.a0.mat() + alpha * p.a1.mat() + beta * p.a2.mat();
}

/// Seeded direction sampling for q2 witnesses on {q1 = 1}.
std::optional<Vector> sample_witness(const QQ2Problem& p, bool want_below,
                                     double margin, std::uint64_t seed,
                                     int budget) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = p.n();
  // Eigenvector directions first: extremes of q2 on the A1-unit set often
  // live there.
  std::vector<Vector> candidates;
  const EigDecomp e2 = sym_eig(p.a2);
  const EigDecomp e1 = sym_eig(p.a1);
  for (int k = 0; k < n; ++k) {
    candidates.push_back(e2.vectors.col(k));
    candidates.push_back(e1.vectors.col(k));
  }
  for (int i = 0; i < budget; ++i) {
    Vector d(n);
    for (int j = 0; j < n; ++j) d[j] = normal(rng);
    candidates.push_back(std::move(d));
  }
  for (auto& d : candidates) {
    const double s1 = p.q1(d);
    if (s1 <= 1e-12 * std::max(1.0, d.squaredNorm() * p.a1.norm())) continue;
    Vector x = d / std::sqrt(s1);
    const double v = p.q2(x);
    if (want_below ? (v < 1.0 - margin) : (v > 1.0 + margin)) return x;
  }
  return std::nullopt;
}

}  // namespace

AssumptionReport check_assumptions(const QQ2Problem& p,
                                   const SolveOptions& opts) {
  AssumptionReport rep;

  const Pencil2Result pr =
      find_definite_pencil2(p.a1, p.a2, opts.pencil_grid, opts.line_budget);
  if (pr.found) rep.definite_combination = std::make_pair(pr.mu1, pr.mu2);
  rep.pencil_best_lambda_min = pr.best_lambda_min;
  rep.pencil_definitely_none = pr.definitely_none;
  rep.pencil_resolution = pr.grid_resolution;

  const Inertia diff = inertia(Matrix(p.a2.mat() - p.a1.mat()), opts.tol_rank);
  rep.a2_minus_a1_indefinite = diff.n_neg > 0 && diff.n_pos > 0;

  if (!qq1_feasible(p.a1)) {
    rep.q2_min = std::numeric_limits<double>::quiet_NaN();
    rep.q2_max = std::numeric_limits<double>::quiet_NaN();
    rep.notes = "constraint q1(x) = 1 is unsatisfiable";
    return rep;
  }

  const double margin = 1e-9;

  // inf of q2 over {q1 = 1}: a one-constraint subproblem with objective A2.
  QQ1Solution lo = solve_qq1(QQ1Problem(p.a2, p.a1), opts.tol_rank);
  if (lo.status == Qq1Status::Unbounded) {
    rep.q2_min_is_bound = false;
    rep.q2_min = -std::numeric_limits<double>::infinity();
    rep.interior_witness = sample_witness(p, true, margin, opts.seed, 20000);
    if (!rep.interior_witness) {
      rep.notes += "inf q2 = -inf but sampling found no witness; ";
    }
  } else {
    rep.q2_min = lo.value;
    if (lo.status == Qq1Status::Attained && lo.value < 1.0 - margin) {
      rep.interior_witness = lo.x_star;
    } else if (lo.value < 1.0 - margin) {
      rep.interior_witness = sample_witness(p, true, margin, opts.seed, 20000);
    }
  }

  // sup of q2 over {q1 = 1} via the negated objective.
  QQ1Solution hi = solve_qq1(QQ1Problem(SymMat(-p.a2.mat()), p.a1), opts.tol_rank);
  if (hi.status == Qq1Status::Unbounded) {
    rep.q2_max_is_bound = false;
    rep.q2_max = std::numeric_limits<double>::infinity();
    rep.exterior_witness = sample_witness(p, false, margin, opts.seed + 1, 20000);
    if (!rep.exterior_witness) {
      rep.notes += "sup q2 = +inf but sampling found no witness; ";
    }
  } else {
    rep.q2_max = -hi.value;
    if (hi.status == Qq1Status::Attained && rep.q2_max > 1.0 + margin) {
      rep.exterior_witness = hi.x_star;
    } else if (rep.q2_max > 1.0 + margin) {
      rep.exterior_witness = sample_witness(p, false, margin, opts.seed + 1, 20000);
    }
  }
  return rep;
}

CompactnessReport check_compactness(const QQ2Problem& p,
                                    const SolveOptions& opts) {
  CompactnessReport rep{Compactness::EmptyFeasible};
  if (!qq1_feasible(p.a1)) {
    rep.notes = "q1(x) = 1 unsatisfiable";
    return rep;
  }
  const AssumptionReport as = check_assumptions(p, opts);
  const double ftol = 1e-9;
  if (p.mode == ConstraintMode::Equality) {
    if ((as.q2_min_is_bound && as.q2_min > 1.0 + ftol) ||
        (as.q2_max_is_bound && as.q2_max < 1.0 - ftol)) {
      rep.notes = "q2 range on {q1 = 1} misses 1";
      return rep;
    }
    const Pencil2Result pr =
        find_definite_pencil2(p.a1, p.a2, opts.pencil_grid, opts.line_budget);
    rep.resolution = pr.grid_resolution;
    rep.achieved_lambda_min = pr.best_lambda_min;
    if (pr.found) {
      rep.result = Compactness::CompactEquality;
      rep.mu1 = pr.mu1;
      rep.mu2 = pr.mu2;
    } else if (pr.definitely_none) {
      rep.result = Compactness::NotCompact;
    } else {
      rep.result = Compactness::UnknownAtResolution;
      rep.notes = "no definite combination found at this grid resolution";
    }
    return rep;
  }

  if (as.q2_min_is_bound && as.q2_min > 1.0 + ftol) {
    rep.notes = "min q2 on {q1 = 1} exceeds 1";
    return rep;
  }
  // The one-parameter search mu -> lambda_min(mu A1 + A2) is concave, so the
  // maximization is globally reliable and "not found" is conclusive.
  const auto shift = find_definite_shift(p.a2, p.a1, opts.line_budget);
  if (shift) {
    rep.result = Compactness::CompactInequality;
    rep.mu1 = shift->mu;
    rep.mu2 = 1.0;
    rep.achieved_lambda_min = shift->certificate.lambda_min_achieved;
  } else {
    rep.result = Compactness::NotCompact;
  }
  return rep;
}

DualResult solve_dual(const QQ2Problem& p, const SolveOptions& opts) {
  // At any certificate point (A0 + alpha A1 + beta A2) x = 0, multiplying by
  // x^T gives q0(x) + alpha q1(x) + beta q2(x) = 0. With q1 = 1 and either
  // q2 = 1 or beta = 0, the objective value is q0(x) = -alpha - beta, so the
  // multiplier search maximizes -alpha - beta over the PSD region.
  DualResult res;
  const double scale = p.scale();
  const bool ineq = p.mode == ConstraintMode::Inequality;
  const double beta_lo = ineq ? 0.0 : -std::numeric_limits<double>::infinity();

  const Pencil2Result pr =
      find_definite_pencil2(p.a1, p.a2, opts.pencil_grid, opts.line_budget);
  if (!pr.found) {
    throw SolveError("solve_dual",
                     "a positive definite combination of A1, A2 is required");
  }
  const double mu1 = pr.mu1;
  const double mu2 = pr.mu2;
  const double mstar = pr.certificate->lambda_min_achieved;
  const Matrix w = mu1 * p.a1.mat() + mu2 * p.a2.mat();

  const auto eig_at = [&](double alpha, double beta) {
    return sym_eig(lagrangian_hessian(p, alpha, beta));
  };
  const double feas_eps = 1e-12 * scale;

  // ---- Initial dual-feasible point.
  bool have_feasible = false;
  double best_alpha = 0.0, best_beta = 0.0, lb = -std::numeric_limits<double>::infinity();
  if (const auto a0_line = min_shift_psd(p.a0.mat(), p.a1.mat())) {
    best_alpha = *a0_line;
    best_beta = 0.0;
    lb = -best_alpha;
    have_feasible = true;
  }
  if (!have_feasible && (!ineq || mu2 > 0)) {
    const double lam0 = lambda_min(p.a0.mat());
    const double t0 = std::max(0.0, -lam0 / mstar) + 1.0;
    best_alpha = t0 * mu1;
    best_beta = t0 * mu2;
    lb = -best_alpha - best_beta;
    have_feasible = true;
  }
  if (!have_feasible) {
    // Inequality mode with the definite direction pointing to beta < 0:
    // scan beta levels for a PSD alpha-interval.
    for (int k = 0; k <= 40 && !have_feasible; ++k) {
      const double beta_hat = (std::pow(2.0, k) - 1.0) * std::max(1.0, scale);
      if (const auto a_line =
              min_shift_psd(p.a0.mat() + beta_hat * p.a2.mat(), p.a1.mat())) {
        best_alpha = *a_line;
        best_beta = beta_hat;
        lb = -best_alpha - best_beta;
        have_feasible = true;
      }
    }
  }
  if (!have_feasible) {
    res.status = DualStatus::NoFeasiblePoint;
    return res;
  }
  res.trace.push_back({best_alpha, best_beta,
                       lambda_min(lagrangian_hessian(p, best_alpha, best_beta)),
                       lb, true});

  // ---- Cutting-plane loop on the outer approximation.
  double box = 1024.0 * (1.0 + std::abs(lb) + scale);
  const double box_cap = 1e13 * (1.0 + std::abs(lb) + scale);
  std::vector<Cut> cuts;
  double ub = std::numeric_limits<double>::infinity();
  const double gap_tol = std::max(opts.dual_gap_tol * std::max(1.0, std::abs(lb)), 1e-14);

  const auto rebuild = [&](double r) {
    TwoVarLP lp(-r, std::max(beta_lo, -r));
    lp.add(1, 0, r);
    lp.add(-1, 0, r);
    lp.add(0, 1, r);
    lp.add(0, -1, -std::max(beta_lo, -r));
    for (const auto& c : cuts) lp.add(c.a, c.b, c.c);
    return lp;
  };
  TwoVarLP lp = rebuild(box);

  double last_ub = std::numeric_limits<double>::infinity();
  int stall = 0;
  int it = 0;
  for (; it < opts.dual_max_iters; ++it) {
    if (!lp.feasible()) break;  // outer approximation emptied: numerical; refine below
    const double al = lp.x();
    const double be = lp.y();
    const EigDecomp eg = eig_at(al, be);
    const double g = eg.values[0];
    const Vector v = eg.vectors.col(0);
    const bool on_box =
        std::abs(al) > box * (1.0 - 1e-9) || std::abs(be) > box * (1.0 - 1e-9);
    const bool improving = -al - be > lb + gap_tol;
    res.trace.push_back({al, be, g, -al - be, g >= -feas_eps});
    if (g >= 0 && -al - be > lb) {
      lb = -al - be;
      best_alpha = al;
      best_beta = be;
    }
    if (on_box && g >= -feas_eps) {
      if (!improving) break;  // the optimal face touches the box; lb is tight
      // The dual region reaches the box in the improving direction.
      box *= 16.0;
      if (box > box_cap) {
        res.status = DualStatus::Unbounded;
        return res;
      }
      lp = rebuild(box);
      continue;
    }
    ub = -al - be;
    if (ub - lb <= gap_tol) break;
    if (last_ub - ub < 1e-13 * std::max(1.0, std::abs(ub))) {
      if (++stall > 25) break;
    } else {
      stall = 0;
    }
    last_ub = ub;

    const double s1 = v.dot(p.a1.mat() * v);
    const double s2 = v.dot(p.a2.mat() * v);
    // Supergradient cut: lambda_min is concave, so for all (a, b) in the PSD
    // region 0 <= lambda_min(a, b) <= g + s1 (a - al) + s2 (b - be).
    cuts.push_back({-s1, -s2, g - s1 * al - s2 * be});
    if (!lp.add(-s1, -s2, g - s1 * al - s2 * be)) break;

    if (g < 0) {
      // Restore feasibility along the definite direction; lambda_min grows
      // at rate at least mstar there.
      const double thi = -g / mstar + 1e-300;
      double a_lo = 0.0, a_hi = thi;
      for (int b2 = 0; b2 < 40; ++b2) {
        const double mid = 0.5 * (a_lo + a_hi);
        if (lambda_min(lagrangian_hessian(p, al + mid * mu1, be + mid * mu2)) >= 0) {
          a_hi = mid;
        } else {
          a_lo = mid;
        }
      }
      const double ra = al + a_hi * mu1;
      const double rb = be + a_hi * mu2;
      if (rb >= beta_lo) {
        const double robj = -ra - rb;
        const double rlam = lambda_min(lagrangian_hessian(p, ra, rb));
        res.trace.push_back({ra, rb, rlam, robj, rlam >= -feas_eps});
        if (rlam >= -feas_eps && robj > lb) {
          lb = robj;
          best_alpha = ra;
          best_beta = rb;
        }
      }
    }
  }
  res.iterations = it;

  // ---- Level refinement: the dual value is the largest s with
  //   max_{beta} lambda_min((A0 - s A1) + beta (A2 - A1)) >= 0
  // since alpha = -s - beta parametrizes the level line -alpha - beta = s.
  const Matrix diff = p.a2.mat() - p.a1.mat();
  const auto level = [&](double s) {
    return max_lambda_min_on_line(p.a0.mat() - s * p.a1.mat(), diff, beta_lo,
                                  opts.line_budget);
  };
  double s_feas = lb;
  double beta_at = best_beta;
  double s_inf = std::isfinite(ub) ? std::max(ub, lb) : lb + std::max(1.0, std::abs(lb));
  {
    // Ensure the upper end is truly infeasible before bisecting.
    int guard = 0;
    double pad = std::max(1e-9, 1e-9 * std::abs(s_inf));
    while (guard++ < 60) {
      const LineMax lm = level(s_inf + pad);
      if (lm.value < 0) {
        s_inf += pad;
        break;
      }
      s_feas = s_inf + pad;
      beta_at = lm.t;
      pad = std::max(2.0 * pad, std::max(1.0, std::abs(s_inf)));
      s_inf += pad;
      if (s_inf > 1e14 * (1.0 + scale)) {
        res.status = DualStatus::Unbounded;
        return res;
      }
    }
  }
  for (int b2 = 0; b2 < 80; ++b2) {
    if (s_inf - s_feas <= 1e-13 * std::max(1.0, std::abs(s_feas))) break;
    const double mid = 0.5 * (s_feas + s_inf);
    const LineMax lm = level(mid);
    if (lm.value >= 0) {
      s_feas = mid;
      beta_at = lm.t;
    } else {
      s_inf = mid;
    }
  }

  // Golden-section localizes the level-line argmax only to ~sqrt(eps).
  // The derivative of lambda_min along the line is the form value of its
  // eigenvector; bisecting that sign pins beta to machine precision.
  {
    const Matrix base = p.a0.mat() - s_feas * p.a1.mat();
    const auto slope = [&](double b) {
      const EigDecomp e = sym_eig(Matrix(base + b * diff));
      return e.vectors.col(0).dot(diff * e.vectors.col(0));
    };
    double h = 1e-6 * (1.0 + std::abs(beta_at));
    double blo = beta_at - h;
    double bhi = beta_at + h;
    if (ineq) blo = std::max(blo, 0.0);
    bool bracket = false;
    for (int k = 0; k < 40; ++k) {
      if (slope(blo) > 0 && slope(bhi) < 0) {
        bracket = true;
        break;
      }
      h *= 2.0;
      blo = beta_at - h;
      bhi = beta_at + h;
      if (ineq) blo = std::max(blo, 0.0);
      if (ineq && blo == 0.0 && slope(0.0) <= 0) {
        // Constrained maximum at the boundary of the multiplier cone.
        beta_at = 0.0;
        bracket = false;
        break;
      }
    }
    if (bracket) {
      for (int k = 0; k < 100; ++k) {
        const double mid = 0.5 * (blo + bhi);
        if (slope(mid) > 0) {
          blo = mid;
        } else {
          bhi = mid;
        }
      }
      const double candidate = 0.5 * (blo + bhi);
      if (lambda_min(Matrix(base + candidate * diff)) >=
          -1e-11 * std::max(1.0, scale)) {
        beta_at = candidate;
      }
    }
  }

  res.status = DualStatus::Optimal;
  res.beta = beta_at;
  res.alpha = -s_feas - beta_at;
  res.value = s_feas;
  res.lambda_min = lambda_min(lagrangian_hessian(p, res.alpha, res.beta));
  res.gap = s_inf - s_feas;
  res.trace.push_back({res.alpha, res.beta, res.lambda_min, res.value,
                       res.lambda_min >= -feas_eps});
  return res;
}

Vector recover_primal(const QQ2Problem& p, double alpha, double beta,
                      double tol, const SolveOptions& opts) {
  const Matrix g = lagrangian_hessian(p, alpha, beta);
  const double lam = lambda_min(g);
  if (lam < -tol * std::max(1.0, g.norm())) {
    throw SolveError("recover_primal",
                     "Lagrangian Hessian is not PSD at the given multipliers");
  }
  Matrix basis = nullspace_basis(g, opts.tol_rank);
  if (basis.cols() == 0) {
    basis = sym_eig(g).vectors.leftCols(1);
  }
  const int d = static_cast<int>(basis.cols());
  const bool ineq = p.mode == ConstraintMode::Inequality;
  const bool target_boundary = !ineq || beta > opts.tol_psd;
  // Acceptance band for matching the q2 target inside the null space. The
  // multipliers localize their argmax only to ~sqrt(eps), which shifts the
  // restricted forms by that much; the retraction in finish() snaps the
  // selected point back onto the constraints exactly.
  const double feas = std::max(opts.tol_feas, 1e-6);

  const auto finish = [&](const Vector& y) {
    Vector x = basis * y;
    const double s1 = p.q1(x);
    if (s1 <= 1e-12) {
      throw SolveError("recover_primal", "null-space direction has q1 <= 0");
    }
    x /= std::sqrt(s1);
    if (target_boundary) {
      // The multipliers carry the argmax noise of the one-dimensional
      // searches (~sqrt(eps)), and the null direction inherits it. Snapping
      // onto the active constraints removes the first-order error.
      if (const auto polished = retract_to_manifold(p, x)) {
        if ((*polished - x).norm() <= 1e-4 * std::max(1.0, x.norm())) {
          x = *polished;
        }
      }
    }
    return canonical_sign(x);
  };
  const auto check_q2 = [&](const Vector& x) {
    const double v = p.q2(x);
    if (target_boundary) return std::abs(v - 1.0) <= 1e-6;
    return v <= 1.0 + feas;
  };

  if (d == 1) {
    Vector y(1);
    y << 1.0;
    const double s1 = basis.col(0).dot(p.a1.mat() * basis.col(0));
    if (s1 <= 1e-12) {
      throw SolveError("recover_primal",
                       "one-dimensional null space has nonpositive q1");
    }
    const Vector x = finish(y);
    if (!check_q2(x)) {
      throw SolveError("recover_primal",
                       "certificate inconsistent: null direction violates the "
                       "q2 constraint (d=1, q2=" +
                           std::to_string(p.q2(x)) + ")");
    }
    return x;
  }

  // d >= 2: work in null-space coordinates.
  const Matrix m1 = basis.transpose() * p.a1.mat() * basis;
  const Matrix m2 = basis.transpose() * p.a2.mat() * basis;

  const auto rotate_to_boundary = [&](const Vector& y_in,
                                      const Vector& y_out) -> std::optional<Vector> {
    // q2/q1 along the arc between two q1-normalized null vectors; bisect the
    // scale-invariant ratio to the boundary value 1.
    const auto ratio = [&](double theta) -> std::optional<double> {
      const Vector y = std::cos(theta) * y_in + std::sin(theta) * y_out;
      const double den = y.dot(m1 * y);
      if (den <= 1e-12) return std::nullopt;
      return y.dot(m2 * y) / den;
    };
    double tlo = 0.0, thi = M_PI / 2.0;
    const auto rlo = ratio(tlo);
    const auto rhi = ratio(thi);
    if (!rlo || !rhi) return std::nullopt;
    const bool increasing = *rhi >= *rlo;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (tlo + thi);
      const auto rm = ratio(mid);
      if (!rm) return std::nullopt;
      if ((*rm >= 1.0) == increasing) {
        thi = mid;
      } else {
        tlo = mid;
      }
    }
    const Vector y = std::cos(thi) * y_in + std::sin(thi) * y_out;
    return y;
  };

  // The bracketing arc can degenerate (the q1-form may vanish along it), in
  // which case the complementary arc between the same endpoints cannot.
  const auto rotate_either_arc =
      [&](const Vector& y_in, const Vector& y_out) -> std::optional<Vector> {
    if (auto r = rotate_to_boundary(y_in, y_out)) return r;
    return rotate_to_boundary(y_in, Vector(-y_out));
  };

  std::optional<Vector> chosen;
  double q2_lo = std::numeric_limits<double>::quiet_NaN();
  double q2_hi = std::numeric_limits<double>::quiet_NaN();
  std::optional<QQ1Solution> lo, hi;
  try {
    QQ1Solution s = solve_qq1(QQ1Problem(SymMat(m2), SymMat(m1)), opts.tol_rank);
    if (s.status == Qq1Status::Attained) lo = std::move(s);
  } catch (const std::exception&) {
  }
  try {
    QQ1Solution s =
        solve_qq1(QQ1Problem(SymMat(-m2), SymMat(m1)), opts.tol_rank);
    if (s.status == Qq1Status::Attained) hi = std::move(s);
  } catch (const std::exception&) {
  }
  if (lo) q2_lo = lo->value;
  if (hi) q2_hi = -hi->value;
  if (!target_boundary) {
    if (lo && q2_lo <= 1.0 + feas) chosen = lo->x_star;
  } else if (lo && std::abs(q2_lo - 1.0) <= feas) {
    // One extreme can sit exactly on the target while the other side is
    // unbounded (the boundary hard case), so the sides act independently.
    chosen = lo->x_star;
  } else if (hi && std::abs(q2_hi - 1.0) <= feas) {
    chosen = hi->x_star;
  } else if (lo && hi && q2_lo < 1.0 && q2_hi > 1.0) {
    chosen = rotate_either_arc(lo->x_star, hi->x_star);
  }

  if (!chosen) {
    // Seeded sampling fallback over the null space: keep a few bracketing
    // candidates on each side of the target and rotate between them.
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::pair<double, Vector>> inside, outside;
    Vector best_free;
    double best_free_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < opts.recover_samples; ++i) {
      Vector y(d);
      for (int j = 0; j < d; ++j) y[j] = normal(rng);
      const double s1 = y.dot(m1 * y);
      if (s1 <= 1e-12) continue;
      y /= std::sqrt(s1);
      const double v = y.dot(m2 * y);
      const auto keep = [&](std::vector<std::pair<double, Vector>>& side,
                            bool prefer_large) {
        side.emplace_back(v, y);
        std::sort(side.begin(), side.end(),
                  [&](const auto& a, const auto& b) {
                    return prefer_large ? a.first > b.first : a.first < b.first;
                  });
        if (side.size() > 4) side.pop_back();
      };
      if (v <= 1.0) keep(inside, true);
      if (v >= 1.0) keep(outside, false);
      if (v < best_free_val) {
        best_free_val = v;
        best_free = y;
      }
    }
    if (!inside.empty()) q2_lo = inside.front().first;
    if (!outside.empty()) q2_hi = outside.front().first;
    if (!target_boundary) {
      if (best_free.size() > 0 && best_free_val <= 1.0 + feas) chosen = best_free;
    } else if (!inside.empty() && std::abs(inside.front().first - 1.0) <= feas) {
      chosen = inside.front().second;
    } else if (!outside.empty() &&
               std::abs(outside.front().first - 1.0) <= feas) {
      chosen = outside.front().second;
    } else {
      for (const auto& [vi, yi] : inside) {
        for (const auto& [vo, yo] : outside) {
          chosen = rotate_either_arc(yi, yo);
          if (chosen) break;
        }
        if (chosen) break;
      }
    }
  }

  if (!chosen) {
    throw SolveError(
        "recover_primal",
        "no feasible null-space combination found (d=" + std::to_string(d) +
            ", q2 extremes [" + std::to_string(q2_lo) + ", " +
            std::to_string(q2_hi) + "])");
  }
  const Vector x = finish(*chosen);
  if (!check_q2(x)) {
    throw SolveError(
        "recover_primal",
        "recovered point violates the q2 constraint (d=" + std::to_string(d) +
            ", q2=" + std::to_string(p.q2(x)) + ")");
  }
  return x;
}

CertificateCheck verify_global_certificate(const QQ2Problem& p, const Vector& x,
                                           double alpha, double beta,
                                           double tol) {
  CertificateCheck c;
  const Matrix g = lagrangian_hessian(p, alpha, beta);
  const double st_scale = (p.a0.norm() + std::abs(alpha) * p.a1.norm() +
                           std::abs(beta) * p.a2.norm()) *
                              x.norm() +
                          1e-300;
  c.stationarity_residual = (g * x).norm();
  c.stationarity = c.stationarity_residual <= tol * std::max(1.0, st_scale);

  c.q1_error = std::abs(p.q1(x) - 1.0);
  const double q2 = p.q2(x);
  if (p.mode == ConstraintMode::Inequality) {
    c.q2_violation = std::max(0.0, q2 - 1.0);
    c.complementarity_residual = std::abs(beta * (q2 - 1.0));
    c.complementarity =
        c.complementarity_residual <= tol * std::max(1.0, std::abs(beta));
    c.multiplier_sign = beta >= -tol;
  } else {
    c.q2_violation = std::abs(q2 - 1.0);
    c.complementarity = true;
    c.multiplier_sign = true;
  }
  c.feasibility = c.q1_error <= tol && c.q2_violation <= tol;

  c.lambda_min_g = lambda_min(g);
  c.psd = c.lambda_min_g >= -tol * std::max(1.0, g.norm());
  c.pass = c.stationarity && c.feasibility && c.complementarity &&
           c.multiplier_sign && c.psd;
  return c;
}

namespace {

Qq2Solution reduce_to_qq1(const QQ2Problem& p, const SolveOptions& opts,
                          Qq2Solution sol) {
  sol.reduced_to_qq1 = true;
  const QQ1Solution q = solve_qq1(QQ1Problem(p.a0, p.a1), opts.tol_rank);
  switch (q.status) {
    case Qq1Status::Infeasible:
      sol.status = Qq2Status::Infeasible;
      return sol;
    case Qq1Status::Unbounded:
      sol.status = Qq2Status::Unbounded;
      sol.detail += "objective unbounded below on {q1 = 1}; ";
      return sol;
    case Qq1Status::Unattained:
      sol.status = Qq2Status::Unattained;
      sol.value = q.value;
      sol.detail += "infimum not attained on {q1 = 1}; ";
      return sol;
    case Qq1Status::Attained:
      break;
  }
  sol.status = Qq2Status::Global;
  sol.x_star = q.x_star;
  sol.value = p.q0(q.x_star);
  sol.certificate = GlobalCertificate{q.x_star, q.alpha, 0.0, sol.value,
                                      q.lambda_min};
  sol.check = verify_global_certificate(p, q.x_star, q.alpha, 0.0, opts.tol_psd);
  if (!sol.check.pass) {
    throw SolveError("verify_global_certificate",
                     "reduced single-constraint certificate failed");
  }
  return sol;
}

}  // namespace

Qq2Solution solve_qq2(const QQ2Problem& p, const SolveOptions& opts) {
  if (p.n() < 3) {
    throw std::invalid_argument("solve_qq2: dimension must be >= 3");
  }
  Qq2Solution sol;
  sol.assumptions = check_assumptions(p, opts);

  if (!qq1_feasible(p.a1)) {
    sol.status = Qq2Status::Infeasible;
    sol.detail = "constraint q1(x) = 1 is unsatisfiable";
    return sol;
  }

  if (!sol.assumptions.definite_combination) {
    sol.status = Qq2Status::AssumptionFailure;
    sol.detail = sol.assumptions.pencil_definitely_none
                     ? "no positive definite combination of A1, A2 exists"
                     : "no positive definite combination of A1, A2 found at "
                       "grid resolution " +
                           std::to_string(sol.assumptions.pencil_resolution) +
                           " (a combination including A0 may still exist; "
                           "that relaxation is not implemented)";
    return sol;
  }

  const double margin = 1e-9;
  const bool c2 = !sol.assumptions.q2_min_is_bound ||
                  sol.assumptions.q2_min < 1.0 - margin;
  const bool c3 = !sol.assumptions.q2_max_is_bound ||
                  sol.assumptions.q2_max > 1.0 + margin;

  if (p.mode == ConstraintMode::Inequality) {
    if (!c3) {
      // q2 <= 1 everywhere on {q1 = 1}: the second constraint is inactive.
      return reduce_to_qq1(p, opts, std::move(sol));
    }
    if (!c2) {
      if (sol.assumptions.q2_min_is_bound &&
          sol.assumptions.q2_min > 1.0 + margin) {
        sol.status = Qq2Status::Infeasible;
        sol.detail = "min q2 over {q1 = 1} exceeds 1";
        return sol;
      }
      sol.status = Qq2Status::AssumptionFailure;
      sol.detail = "no point with q1 = 1 and q2 strictly below 1 (the "
                   "feasible set degenerates to the q2 = 1 slice)";
      return sol;
    }
  } else {
    const bool below_ok = !sol.assumptions.q2_min_is_bound ||
                          sol.assumptions.q2_min <= 1.0 + margin;
    const bool above_ok = !sol.assumptions.q2_max_is_bound ||
                          sol.assumptions.q2_max >= 1.0 - margin;
    if (!below_ok || !above_ok) {
      sol.status = Qq2Status::Infeasible;
      sol.detail = "the range of q2 over {q1 = 1} misses 1";
      return sol;
    }
    if (!c2 && !c3) {
      // q2 is identically 1 on {q1 = 1}: the second constraint is vacuous.
      return reduce_to_qq1(p, opts, std::move(sol));
    }
    if (!c2 || !c3) {
      sol.status = Qq2Status::AssumptionFailure;
      sol.detail = "q2 reaches 1 over {q1 = 1} only as an extreme value";
      return sol;
    }
  }

  sol.dual = solve_dual(p, opts);
  if (sol.dual.status == DualStatus::NoFeasiblePoint) {
    sol.status = Qq2Status::Unbounded;
    sol.detail =
        "no PSD multiplier pair found within the search budget; the "
        "objective is unbounded below on the feasible set";
    return sol;
  }
  if (sol.dual.status == DualStatus::Unbounded) {
    sol.status = Qq2Status::Infeasible;
    sol.detail = "dual unbounded, which indicates primal infeasibility";
    return sol;
  }

  sol.x_star = recover_primal(p, sol.dual.alpha, sol.dual.beta, opts.tol_psd, opts);

  // Re-derive the multipliers at the recovered point by least squares; at an
  // exact stationary point this is machine-precision while the dual search
  // only localizes its argmax to ~sqrt(eps).
  double alpha = sol.dual.alpha;
  double beta = sol.dual.beta;
  {
    const Vector a1 = p.a1.mat() * sol.x_star;
    const Vector a2 = p.a2.mat() * sol.x_star;
    const Vector g0 = p.a0.mat() * sol.x_star;
    const bool boundary = p.mode == ConstraintMode::Equality ||
                          std::abs(p.q2(sol.x_star) - 1.0) <= 1e-7;
    double na = alpha, nb = beta;
    if (boundary) {
      Eigen::Matrix2d gram;
      gram << a1.dot(a1), a1.dot(a2), a2.dot(a1), a2.dot(a2);
      const Eigen::Vector2d c =
          detail::damped_solve2(gram, Eigen::Vector2d(-a1.dot(g0), -a2.dot(g0)));
      na = c[0];
      nb = c[1];
    } else if (beta <= opts.tol_psd) {
      na = -g0.dot(a1) / a1.squaredNorm();
      nb = 0.0;
    }
    const double old_res = (g0 + alpha * a1 + beta * a2).norm();
    const double new_res = (g0 + na * a1 + nb * a2).norm();
    const bool sign_ok =
        p.mode == ConstraintMode::Equality || nb >= -1e-12 * p.scale();
    if (new_res <= old_res && sign_ok) {
      alpha = na;
      beta = std::max(nb, p.mode == ConstraintMode::Inequality ? 0.0 : nb);
    }
  }
  // The polished multipliers pin the null space far more precisely than the
  // dual search; re-recovering there tightens the minimizer.
  if (lambda_min(lagrangian_hessian(p, alpha, beta)) >=
      -opts.tol_psd * p.scale()) {
    try {
      sol.x_star = recover_primal(p, alpha, beta, opts.tol_psd, opts);
    } catch (const SolveError&) {
      // keep the first recovery
    }
  }

  sol.check = verify_global_certificate(p, sol.x_star, alpha, beta, opts.tol_psd);
  if (!sol.check.pass) {
    throw SolveError("verify_global_certificate",
                     "recovered certificate failed verification");
  }
  sol.value = p.q0(sol.x_star);
  sol.certificate =
      GlobalCertificate{sol.x_star, alpha, beta, sol.value, sol.check.lambda_min_g};
  const double expect = -alpha - beta * p.q2(sol.x_star);
  // Quadratic forms at x carry an ||x||^2 factor, so the agreement scale
  // must as well (congruences can make ||x*|| large).
  const double value_scale =
      1.0 + std::abs(alpha) + std::abs(beta) +
      (p.a0.norm() + std::abs(alpha) * p.a1.norm() +
       std::abs(beta) * p.a2.norm()) *
          sol.x_star.squaredNorm();
  if (std::abs(sol.value - expect) > 1e-7 * value_scale) {
    throw SolveError("solve_qq2",
                     "primal value and multipliers disagree beyond tolerance");
  }
  sol.status = Qq2Status::Global;
  return sol;
}

}  // namespace qqopt
