#include "qqopt/trs.hpp"

#include <cmath>

namespace qqopt {

namespace {

Vector append(const Vector& x, double z) {
  Vector out(x.size() + 1);
  out << x, z;
  return out;
}

}  // namespace

QQ2Problem homogenize_trs(const TRSProblem& t) {
  const int n = t.n();
  Matrix a0 = Matrix::Zero(n + 1, n + 1);
  a0.topLeftCorner(n, n) = t.q.mat();
  a0.topRightCorner(n, 1) = t.b;
  a0.bottomLeftCorner(1, n) = t.b.transpose();
  Matrix a1 = Matrix::Zero(n + 1, n + 1);
  a1(n, n) = 1.0;
  Matrix a2 = Matrix::Identity(n + 1, n + 1);
  a2(n, n) = 0.0;
  return QQ2Problem(SymMat(a0), SymMat(a1), SymMat(a2),
                    ConstraintMode::Inequality);
}

TRSGlobal solve_trs_global(const TRSProblem& t, const SolveOptions& opts) {
  if (t.n() == 1) {
    // Closed form on [-1, 1].
    const double q = t.q(0, 0);
    const double b = t.b[0];
    const auto f = [&](double x) { return q * x * x + 2.0 * b * x; };
    double best_x = -1.0;
    double best = f(-1.0);
    if (f(1.0) < best) {
      best = f(1.0);
      best_x = 1.0;
    }
    if (q > 0) {
      const double xs = -b / q;
      if (std::abs(xs) <= 1.0 && f(xs) < best) {
        best = f(xs);
        best_x = xs;
      }
    }
    Vector x(1);
    x << best_x;
    const bool boundary = std::abs(best_x) >= 1.0 - 1e-12;
    const double mu = boundary ? std::max(0.0, -(q + b * best_x)) : 0.0;
    return TRSGlobal{x, best, mu};
  }

  const QQ2Problem h = homogenize_trs(t);
  const Qq2Solution sol = solve_qq2(h, opts);
  if (sol.status != Qq2Status::Global) {
    throw SolveError("solve_trs_global",
                     "homogenized solve did not return a global minimizer: " +
                         sol.detail);
  }
  const Vector& xz = sol.x_star;
  const double z = xz[t.n()];
  Vector x = xz.head(t.n()) * z;  // (x, z) and (-x, -z) share the objective
  return TRSGlobal{x, sol.value, sol.certificate.beta};
}

std::vector<TRSSecularRoot> trs_secular_roots(const TRSProblem& t, int grid) {
  std::vector<TRSSecularRoot> roots;
  const EigDecomp e = sym_eig(t.q);
  const int n = t.n();
  const double lam1 = e.values[0];
  const double scale = std::max(1.0, t.q.norm());
  if (lam1 >= -1e-12 * scale) return roots;                     // lambda_1 >= 0
  if (n >= 2 && e.values[1] - lam1 <= 1e-10 * scale) return roots;  // not simple

  const double lam2 = n >= 2 ? e.values[1] : std::numeric_limits<double>::infinity();
  const Vector d = e.vectors.transpose() * t.b;

  const double lo = std::max(0.0, -lam2);
  const double hi = -lam1;
  if (hi <= lo) return roots;
  const double eps = 1e-9 * (hi - lo);

  const auto phi = [&](double mu) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double den = e.values[i] + mu;
      s += (d[i] * d[i]) / (den * den);
    }
    return s - 1.0;
  };
  const auto dphi = [&](double mu) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double den = e.values[i] + mu;
      s += -2.0 * (d[i] * d[i]) / (den * den * den);
    }
    return s;
  };

  const double a = lo + eps;
  const double b = hi - eps;
  if (b <= a) return roots;
  double prev_mu = a;
  double prev_val = phi(a);
  for (int k = 1; k <= grid; ++k) {
    const double mu = a + (b - a) * k / grid;
    const double val = phi(mu);
    if ((prev_val < 0) != (val < 0)) {
      // Bisection then Newton polish inside the bracket.
      double blo = prev_mu, bhi = mu;
      double flo = prev_val;
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (blo + bhi);
        const double fm = phi(mid);
        if ((fm < 0) == (flo < 0)) {
          blo = mid;
          flo = fm;
        } else {
          bhi = mid;
        }
      }
      double root = 0.5 * (blo + bhi);
      for (int i = 0; i < 5; ++i) {
        const double der = dphi(root);
        if (std::abs(der) < 1e-300) break;
        const double next = root - phi(root) / der;
        if (next > a && next < b) root = next;
      }

      TRSSecularRoot rec;
      rec.mu = root;
      Vector y = Vector::Zero(n);
      for (int i = 0; i < n; ++i) {
        y += (-d[i] / (e.values[i] + root)) * e.vectors.col(i);
      }
      rec.y = y;
      // Second-order check on the tangent space of the sphere at y.
      Matrix w(n, n - 1);
      {
        Eigen::HouseholderQR<Matrix> qr(Matrix(y.normalized()));
        w = Matrix(qr.householderQ()).rightCols(n - 1);
      }
      const Matrix hess = t.q.mat() + root * Matrix::Identity(n, n);
      const double wmin = n > 1 ? lambda_min(Matrix(w.transpose() * hess * w))
                                : std::numeric_limits<double>::infinity();
      rec.certified = root > 1e-12 && wmin > 1e-10 * scale &&
                      std::abs(phi(root)) < 1e-7;
      roots.push_back(std::move(rec));
    }
    prev_mu = mu;
    prev_val = val;
  }
  return roots;
}

std::optional<TRSLocalNonGlobal> find_trs_local_nonglobal(const TRSProblem& t,
                                                          int grid) {
  const auto roots = trs_secular_roots(t, grid);
  std::optional<TRSLocalNonGlobal> out;
  for (const auto& r : roots) {
    if (!r.certified) continue;
    if (out) {
      throw std::logic_error(
          "find_trs_local_nonglobal: two certified minimizers; at most one "
          "can exist");
    }
    TRSLocalNonGlobal rec;
    rec.y = r.y;
    rec.mu = r.mu;
    rec.secular_residual = std::abs(r.y.squaredNorm() - 1.0);
    Matrix w;
    {
      Eigen::HouseholderQR<Matrix> qr(Matrix(r.y.normalized()));
      w = Matrix(qr.householderQ()).rightCols(t.n() - 1);
    }
    rec.projected_lambda_min = lambda_min(Matrix(
        w.transpose() *
        (t.q.mat() + r.mu * Matrix::Identity(t.n(), t.n())) * w));
    out = rec;
  }
  return out;
}

TRSProblem generate_trs_hard_case(const Vector& lambda, const Matrix& u,
                                  const Vector& weights) {
  const int n = static_cast<int>(lambda.size());
  if (u.rows() != n || u.cols() != n) {
    throw std::invalid_argument("generate_trs_hard_case: U must be n x n");
  }
  for (int i = 1; i < n; ++i) {
    if (lambda[i] < lambda[i - 1]) {
      throw std::invalid_argument(
          "generate_trs_hard_case: lambda must be ascending");
    }
  }
  if (lambda[0] >= 0) {
    throw std::invalid_argument("generate_trs_hard_case: lambda_1 must be < 0");
  }
  int m = 1;
  while (m < n && lambda[m] == lambda[0]) ++m;
  if (m >= n) {
    throw std::invalid_argument(
        "generate_trs_hard_case: no hard case exists when the bottom "
        "eigenvalue fills the spectrum");
  }
  if (weights.size() != n - m) {
    throw std::invalid_argument(
        "generate_trs_hard_case: need one weight per eigenvalue above the "
        "bottom level");
  }
  double s = 0.0;
  for (int j = 0; j < n - m; ++j) {
    const double r = weights[j] / (lambda[m + j] - lambda[0]);
    s += r * r;
  }
  if (s <= 0) {
    throw std::invalid_argument("generate_trs_hard_case: all weights zero");
  }
  const Vector w = weights / std::sqrt(s);
  Vector b = Vector::Zero(n);
  for (int j = 0; j < n - m; ++j) b += w[j] * u.col(m + j);
  const Matrix q = u * lambda.asDiagonal() * u.transpose();
  return TRSProblem(SymMat(q), b);
}

SoscReport check_sosc_at_global(const TRSProblem& t, const SolveOptions& opts) {
  SoscReport rep;
  const TRSGlobal g = solve_trs_global(t, opts);
  rep.mu = g.mu;
  rep.x = g.x;
  rep.value = g.value;

  const int n = t.n();
  const EigDecomp e = sym_eig(t.q);
  const double lam1 = e.values[0];
  const double scale = std::max(1.0, t.q.norm());
  const Matrix hess = t.q.mat() + g.mu * Matrix::Identity(n, n);

  const bool hard = lam1 < 0 && std::abs(g.mu + lam1) <= 1e-7 * scale;
  if (!hard) {
    // Q + mu I is nonsingular, so the minimizer for the (unique) multiplier
    // is unique.
    rep.strict_global = true;
  } else {
    // All global minimizers are y_bar + (bottom eigenspace component) with
    // squared radius 1 - ||y_bar||^2.
    int m = 1;
    while (m < n && e.values[m] - lam1 <= 1e-10 * scale) ++m;
    Vector ybar = Vector::Zero(n);
    for (int j = m; j < n; ++j) {
      const double dj = e.vectors.col(j).dot(t.b);
      ybar += (-dj / (e.values[j] - lam1)) * e.vectors.col(j);
    }
    rep.strict_global = 1.0 - ybar.squaredNorm() <= 1e-8;
  }

  if (g.x.norm() < 1.0 - 1e-9) {
    rep.sosc_holds = lambda_min(t.q.mat()) > 1e-10 * scale;
  } else if (n == 1) {
    rep.sosc_holds = true;  // empty tangent space
  } else {
    Eigen::HouseholderQR<Matrix> qr(Matrix(g.x.normalized()));
    const Matrix w = Matrix(qr.householderQ()).rightCols(n - 1);
    rep.sosc_holds =
        lambda_min(Matrix(w.transpose() * hess * w)) > 1e-10 * scale;
  }
  return rep;
}

TRSSolution solve_trs(const TRSProblem& t, const SolveOptions& opts) {
  TRSSolution sol;
  const TRSGlobal g = solve_trs_global(t, opts);
  sol.global_x = g.x;
  sol.global_value = g.value;
  sol.mu_global = g.mu;
  sol.local_nonglobal = find_trs_local_nonglobal(t);
  const double lam1 = lambda_min(t.q.mat());
  sol.hard_case =
      lam1 < 0 && std::abs(g.mu + lam1) <= 1e-7 * std::max(1.0, t.q.norm());
  return sol;
}

}  // namespace qqopt
