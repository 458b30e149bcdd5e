#include <cmath>

#include "qqopt/qq2.hpp"

namespace qqopt {

namespace detail {

/// Solve the 2x2 system M c = r with a clamped pseudo-inverse.
Eigen::Vector2d damped_solve2(const Eigen::Matrix2d& m,
                              const Eigen::Vector2d& r) {
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector2d s = svd.singularValues();
  const double clamp = 1e-13 * std::max(1.0, s[0]);
  Eigen::Vector2d inv;
  for (int i = 0; i < 2; ++i) inv[i] = s[i] > clamp ? 1.0 / s[i] : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * r;
}

}  // namespace detail

std::optional<Vector> retract_to_manifold(const QQ2Problem& p, Vector x,
                                          int max_iters) {
  const double tol = 1e-13;
  for (int it = 0; it < max_iters; ++it) {
    const double r1 = p.q1(x) - 1.0;
    const double r2 = p.q2(x) - 1.0;
    const double rnorm = std::hypot(r1, r2);
    if (rnorm <= tol) return x;
    const Vector a1 = p.a1.mat() * x;
    const Vector a2 = p.a2.mat() * x;
    Eigen::Matrix2d m;
    m << 2.0 * a1.dot(a1), 2.0 * a1.dot(a2), 2.0 * a2.dot(a1),
        2.0 * a2.dot(a2);
    const Eigen::Vector2d c = detail::damped_solve2(m, Eigen::Vector2d(-r1, -r2));
    const Vector step = c[0] * a1 + c[1] * a2;
    // Backtrack on the residual to keep Newton tame far from the manifold.
    double s = 1.0;
    bool ok = false;
    for (int ls = 0; ls < 25; ++ls) {
      const Vector cand = x + s * step;
      if (std::hypot(p.q1(cand) - 1.0, p.q2(cand) - 1.0) < rnorm) {
        x = cand;
        ok = true;
        break;
      }
      s *= 0.5;
    }
    if (!ok || !x.allFinite() || x.norm() > 1e10) return std::nullopt;
  }
  if (std::hypot(p.q1(x) - 1.0, p.q2(x) - 1.0) <= 1e-10) return x;
  return std::nullopt;
}

Vector tangent_project(const QQ2Problem& p, const Vector& x, const Vector& v) {
  const Vector a1 = p.a1.mat() * x;
  const Vector a2 = p.a2.mat() * x;
  Eigen::Matrix2d gram;
  gram << a1.dot(a1), a1.dot(a2), a2.dot(a1), a2.dot(a2);
  const Eigen::Vector2d c =
      detail::damped_solve2(gram, Eigen::Vector2d(a1.dot(v), a2.dot(v)));
  return v - c[0] * a1 - c[1] * a2;
}

}  // namespace qqopt
