#include "qqopt/pencil.hpp"

#include <cmath>

namespace qqopt {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5)-1)/2

double pos_margin(double scale) { return 1e-14 * std::max(1.0, scale); }

}  // namespace

LineMax max_lambda_min_on_line(const Matrix& c, const Matrix& d, double lo,
                               int budget) {
  const auto f = [&](double t) { return lambda_min(c + t * d); };

  const bool bounded_below = std::isfinite(lo);
  double m = bounded_below ? std::max(lo, 0.0) : 0.0;
  double fm = f(m);

  // Expand a bracket [a, b] around a point no worse than both ends. The
  // function is concave, so doubling steps either bracket the max or run
  // into a plateau, which golden-section handles as well.
  double step = 1.0 + std::abs(m);
  double a = bounded_below ? std::max(lo, m - step) : m - step;
  double b = m + step;
  double fa = f(a);
  double fb = f(b);
  for (int i = 0; i < 80; ++i) {
    if (fm >= fa && fm >= fb) break;
    if (fa > fm) {
      if (bounded_below && a <= lo) {
        // Max sits on the boundary.
        b = m;
        fb = fm;
        m = a;
        fm = fa;
        break;
      }
      b = m;
      fb = fm;
      m = a;
      fm = fa;
      step *= 2.0;
      a = bounded_below ? std::max(lo, m - step) : m - step;
      fa = f(a);
    } else {
      a = m;
      fa = fm;
      m = b;
      fm = fb;
      step *= 2.0;
      b = m + step;
      fb = f(b);
    }
  }

  // Golden-section on [a, b].
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < budget; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    }
  }

  LineMax best{m, fm};
  if (f1 > best.value) best = {x1, f1};
  if (f2 > best.value) best = {x2, f2};
  return best;
}

std::optional<ShiftResult> find_definite_shift(const SymMat& a, const SymMat& b,
                                               int budget) {
  if (a.n() != b.n()) {
    throw std::invalid_argument("find_definite_shift: dimension mismatch");
  }
  const LineMax m = max_lambda_min_on_line(
      a.mat(), b.mat(), -std::numeric_limits<double>::infinity(), budget);
  if (m.value <= pos_margin(a.norm() + b.norm())) return std::nullopt;
  Vector mu(1);
  mu[0] = m.t;
  const double achieved = lambda_min(a.mat() + m.t * b.mat());
  return ShiftResult{m.t, PencilCertificate{mu, achieved}};
}

std::optional<double> min_shift_psd(const Matrix& c, const Matrix& d,
                                    int budget) {
  const auto g = [&](double t) { return lambda_min(c + t * d); };

  // Find any PSD point first; a doubling scan handles maps that keep
  // increasing, where a bracketed maximization would run off to infinity.
  const double step0 = 1.0 + (c.cwiseAbs().rowwise().sum().maxCoeff() + 1.0) /
                                 (d.cwiseAbs().rowwise().sum().maxCoeff() + 1.0);
  double hi = 0.0;
  bool have_hi = g(0.0) >= 0;
  for (int k = 0; k < 60 && !have_hi; ++k) {
    for (const double s : {1.0, -1.0}) {
      const double t = s * step0 * std::pow(2.0, k);
      if (g(t) >= 0) {
        hi = t;
        have_hi = true;
        break;
      }
    }
  }
  if (!have_hi) {
    // The PSD interval, if any, fell between scan points; the concave
    // maximization localizes it (or proves emptiness).
    const LineMax peak = max_lambda_min_on_line(
        c, d, -std::numeric_limits<double>::infinity(), budget);
    const double noise = 1e-13 * std::max(1.0, c.norm() + d.norm());
    if (peak.value < -noise) return std::nullopt;
    hi = peak.t;
  }

  double step = step0;
  double lo = hi - step;
  int guard = 0;
  while (g(lo) >= 0 && guard++ < 100) {
    step *= 2.0;
    lo = hi - step;
  }
  if (g(lo) >= 0) return std::nullopt;  // no decay found: lambda_max(D) <= 0

  while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi) + std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) >= 0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

Pencil2Result find_definite_pencil2(const SymMat& a1, const SymMat& a2,
                                    int grid, int budget) {
  if (a1.n() != a2.n()) {
    throw std::invalid_argument("find_definite_pencil2: dimension mismatch");
  }
  if (grid < 8) grid = 8;

  const auto g = [&](double theta) {
    return lambda_min(std::cos(theta) * a1.mat() + std::sin(theta) * a2.mat());
  };

  const double two_pi = 2.0 * M_PI;
  const double h = two_pi / grid;
  double best_theta = 0.0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double theta = i * h;
    const double v = g(theta);
    if (v > best_val) {
      best_val = v;
      best_theta = theta;
    }
  }

  // |d/dtheta lambda_min| <= ||A1|| + ||A2||, so a grid max this negative
  // rules out a positive value anywhere on the circle.
  const double lipschitz = a1.norm() + a2.norm();
  const bool none = best_val + 0.5 * lipschitz * h < 0.0;

  // Golden-section refinement of the best bracket.
  double a = best_theta - h;
  double b = best_theta + h;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = g(x1);
  double f2 = g(x2);
  for (int i = 0; i < budget; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = g(x1);
    }
  }
  double theta_r = best_theta;
  double val_r = best_val;
  if (f1 > val_r) {
    theta_r = x1;
    val_r = f1;
  }
  if (f2 > val_r) {
    theta_r = x2;
    val_r = f2;
  }

  Pencil2Result res;
  res.grid_resolution = grid;
  res.best_lambda_min = val_r;
  res.definitely_none = none;
  if (val_r > pos_margin(lipschitz)) {
    res.found = true;
    res.mu1 = std::cos(theta_r);
    res.mu2 = std::sin(theta_r);
    Vector mu(2);
    mu << res.mu1, res.mu2;
    const double achieved =
        lambda_min(res.mu1 * a1.mat() + res.mu2 * a2.mat());
    res.certificate = PencilCertificate{mu, achieved};
    res.definitely_none = false;
  }
  return res;
}

CongruenceDiag congruence_diagonalize(const SymMat& a1, const SymMat& a2,
                                      double mu1, double mu2) {
  if (a1.n() != a2.n()) {
    throw std::invalid_argument("congruence_diagonalize: dimension mismatch");
  }
  const Matrix s = mu1 * a1.mat() + mu2 * a2.mat();
  const EigDecomp es = sym_eig(s);
  if (es.values[0] <= 0) {
    throw std::invalid_argument(
        "congruence_diagonalize: pencil not positive definite at mu");
  }
  const Matrix s_inv_half =
      es.vectors * es.values.cwiseSqrt().cwiseInverse().asDiagonal() *
      es.vectors.transpose();

  // Diagonalize whichever matrix owns the larger coefficient in the metric
  // S = mu1 A1 + mu2 A2; the other diagonal follows from
  // mu1 d1 + mu2 d2 = 1 componentwise.
  const int n = a1.n();
  CongruenceDiag out;
  if (std::abs(mu1) >= std::abs(mu2)) {
    const EigDecomp et = sym_eig(Matrix(s_inv_half * a2.mat() * s_inv_half));
    out.p = s_inv_half * et.vectors;
    out.d2 = et.values;
    out.d1 = (Vector::Ones(n) - mu2 * out.d2) / mu1;
  } else {
    const EigDecomp et = sym_eig(Matrix(s_inv_half * a1.mat() * s_inv_half));
    out.p = s_inv_half * et.vectors;
    out.d1 = et.values;
    out.d2 = (Vector::Ones(n) - mu1 * out.d1) / mu2;
  }
  return out;
}

}  // namespace qqopt
