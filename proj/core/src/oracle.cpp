#include "qqopt/oracle.hpp"

#include <cmath>
#include <random>
#include <thread>

#include "qqopt/qq2_local.hpp"

namespace qqopt {

namespace {

struct GridBest {
  double value = std::numeric_limits<double>::infinity();
  long index = -1;
  Vector x;
  long n_feasible = 0;
  double max_xsq = 0.0;
};

/// Enumerates unit directions d(i) on the spherical grid and keeps the
/// feasible minimum; ties break on the linear grid index so the reduction is
/// order-independent.
class SphereGrid {
 public:
  SphereGrid(int n, double resolution) : n_(n) {
    const double two_pi = 2.0 * M_PI;
    // Polar angles run over [0, pi] inclusive, the final azimuth over
    // [0, 2*pi). Doubling the counts nests the grids.
    k_polar_ = std::max(4L, std::lround(M_PI / resolution));
    k_azimuth_ = std::max(8L, std::lround(two_pi / resolution));
    switch (n) {
      case 2: total_ = k_azimuth_; break;
      case 3: total_ = (k_polar_ + 1) * k_azimuth_; break;
      case 4: total_ = (k_polar_ + 1) * (k_polar_ + 1) * k_azimuth_; break;
      default:
        throw std::invalid_argument("oracle_global: n must be in {2, 3, 4}");
    }
  }

  long total() const { return total_; }

  Vector direction(long idx) const {
    const double two_pi = 2.0 * M_PI;
    Vector d(n_);
    if (n_ == 2) {
      const double t = two_pi * idx / k_azimuth_;
      d << std::cos(t), std::sin(t);
    } else if (n_ == 3) {
      const long i = idx / k_azimuth_;
      const long j = idx % k_azimuth_;
      const double t1 = M_PI * i / k_polar_;
      const double t2 = two_pi * j / k_azimuth_;
      d << std::cos(t1), std::sin(t1) * std::cos(t2),
          std::sin(t1) * std::sin(t2);
    } else {
      const long per = (k_polar_ + 1) * k_azimuth_;
      const long i = idx / per;
      const long rem = idx % per;
      const long j = rem / k_azimuth_;
      const long l = rem % k_azimuth_;
      const double t1 = M_PI * i / k_polar_;
      const double t2 = M_PI * j / k_polar_;
      const double t3 = two_pi * l / k_azimuth_;
      d << std::cos(t1), std::sin(t1) * std::cos(t2),
          std::sin(t1) * std::sin(t2) * std::cos(t3),
          std::sin(t1) * std::sin(t2) * std::sin(t3);
    }
    return d;
  }

 private:
  int n_;
  long k_polar_ = 0;
  long k_azimuth_ = 0;
  long total_ = 0;
};

}  // namespace

OracleReport oracle_global(const QQ2Problem& p, double resolution,
                           std::optional<double> feas_band, int jobs) {
  if (p.n() > 4) {
    throw std::invalid_argument("oracle_global: guarded to n <= 4");
  }
  if (resolution <= 0) {
    throw std::invalid_argument("oracle_global: resolution must be positive");
  }
  const bool ineq = p.mode == ConstraintMode::Inequality;
  const double band =
      feas_band.value_or(ineq ? 1e-9 : 10.0 * resolution * std::max(1.0, p.a2.norm()));
  const SphereGrid grid(p.n(), resolution);

  const auto scan = [&](long lo, long hi) {
    GridBest best;
    for (long idx = lo; idx < hi; ++idx) {
      const Vector d = grid.direction(idx);
      const double s1 = p.q1(d);
      if (s1 <= 1e-12) continue;
      const Vector x = d / std::sqrt(s1);
      const double q2 = p.q2(x);
      const bool ok = ineq ? (q2 <= 1.0 + band) : (std::abs(q2 - 1.0) <= band);
      if (!ok) continue;
      ++best.n_feasible;
      best.max_xsq = std::max(best.max_xsq, x.squaredNorm());
      const double v = p.q0(x);
      if (v < best.value || (v == best.value && idx < best.index)) {
        best.value = v;
        best.index = idx;
        best.x = x;
      }
    }
    return best;
  };

  GridBest best;
  if (jobs <= 1) {
    best = scan(0, grid.total());
  } else {
    const long total = grid.total();
    const long chunk = (total + jobs - 1) / jobs;
    std::vector<GridBest> parts(jobs);
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w]() {
        parts[w] = scan(w * chunk, std::min(total, (w + 1) * chunk));
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& part : parts) {
      best.n_feasible += part.n_feasible;
      best.max_xsq = std::max(best.max_xsq, part.max_xsq);
      if (part.value < best.value ||
          (part.value == best.value && part.index < best.index)) {
        best.value = part.value;
        best.index = part.index;
        best.x = part.x;
      }
    }
  }

  if (best.index < 0) {
    throw std::runtime_error(
        "oracle_global: no feasible sample (infeasible problem or resolution "
        "too coarse)");
  }

  OracleReport rep;
  rep.value = best.value;
  rep.argmin = best.x;
  rep.n_feasible = best.n_feasible;
  rep.resolution = resolution;
  // |d q0/d angle| <= 2 ||A0|| ||x||^2 (1 + ||A1|| ||x||^2) on the scaled
  // grid curve; neighbor distance is at most resolution * sqrt(n - 1). The
  // Equality-mode band adds a transversal term.
  const double xsq = best.max_xsq;
  rep.error_bound = resolution * std::sqrt(double(p.n() - 1)) * 2.0 *
                        p.a0.norm() * xsq * (1.0 + p.a1.norm() * xsq) +
                    (ineq ? 0.0 : band * p.a0.norm() * xsq);
  return rep;
}

LocalProbeReport oracle_local_probe(const QQ2Problem& p, const Vector& x,
                                    double radius, int n_samples,
                                    std::uint64_t seed) {
  if (radius <= 0 || n_samples < 1) {
    throw std::invalid_argument(
        "oracle_local_probe: radius and n_samples must be positive");
  }
  if (std::abs(p.q1(x) - 1.0) > 1e-7 || std::abs(p.q2(x) - 1.0) > 1e-7) {
    throw std::invalid_argument(
        "oracle_local_probe: point must satisfy q1 = q2 = 1");
  }
  // Tangent space of whatever rank the active gradients have.
  Matrix j(p.n(), 2);
  j.col(0) = p.a1.mat() * x;
  j.col(1) = p.a2.mat() * x;
  Eigen::ColPivHouseholderQR<Matrix> qr(j);
  qr.setThreshold(1e-10);
  const long rank = qr.rank();
  const Matrix q = Eigen::HouseholderQR<Matrix>(j).householderQ();
  const Matrix tangent = q.rightCols(p.n() - rank);
  const int dim = static_cast<int>(tangent.cols());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  LocalProbeReport rep;
  const double f0 = p.q0(x);
  double fbest = f0;
  for (int s = 0; s < n_samples; ++s) {
    Vector u(dim);
    for (int i = 0; i < dim; ++i) u[i] = normal(rng);
    if (u.norm() < 1e-14) continue;
    const double r = radius * std::pow(unif(rng), 1.0 / dim);
    const Vector v = tangent * (r * u.normalized());
    const auto y = retract_to_manifold(p, Vector(x + v));
    ++rep.n_probed;
    if (!y) {
      ++rep.retraction_failures;
      continue;
    }
    fbest = std::min(fbest, p.q0(*y));
  }
  rep.best_violation = std::max(0.0, f0 - fbest);
  rep.is_local_min = rep.best_violation <= 1e-9;
  return rep;
}

double fd_check(const QQ2Problem& p, const Vector& x) {
  const double h = 1e-5 * std::max(1.0, x.norm());
  const SymMat* mats[3] = {&p.a0, &p.a1, &p.a2};
  double worst = 0.0;
  for (const SymMat* m : mats) {
    const Vector grad = 2.0 * (m->mat() * x);
    for (int j = 0; j < p.n(); ++j) {
      Vector e = Vector::Zero(p.n());
      e[j] = h;
      const double fd = (m->quad(x + e) - m->quad(x - e)) / (2.0 * h);
      const double err =
          std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j]));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace qqopt
