#include <benchmark/benchmark.h>

#include <random>

#include "qqopt/oracle.hpp"
#include "qqopt/qq2_global.hpp"
#include "qqopt/qq2_local.hpp"
#include "qqopt/trs.hpp"

namespace {

using namespace qqopt;

Matrix random_sym(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
  return 0.5 * (m + m.transpose());
}

QQ2Problem circle_family() {
  Matrix a0(3, 3);
  a0 << -std::sqrt(2.0), 0.5, 0, 0.5, 0, 0, 0, 0, 0;
  Vector d(3);
  d << 2, 0.5, 1;
  return QQ2Problem(SymMat(a0), SymMat::identity(3), SymMat::diag(d),
                    ConstraintMode::Equality);
}

void BM_SolveQQ2(benchmark::State& state) {
  const auto p = circle_family();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_qq2(p));
  }
}
BENCHMARK(BM_SolveQQ2);

void BM_TrsGlobal(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const TRSProblem t(SymMat(random_sym(n, rng)), Vector(Vector::Random(n)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_trs_global(t));
  }
}
BENCHMARK(BM_TrsGlobal)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_Pencil2(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int n = static_cast<int>(state.range(0));
  const Matrix a1 = random_sym(n, rng);
  const Matrix w =
      random_sym(n, rng) + 2.0 * double(n) * Matrix::Identity(n, n);
  const SymMat s1(a1), s2(Matrix(w - 0.5 * a1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_definite_pencil2(s1, s2));
  }
}
BENCHMARK(BM_Pencil2)->Arg(4)->Arg(16)->Arg(64);

void BM_FindLocal(benchmark::State& state) {
  Matrix a0(3, 3);
  a0 << 0, 0.5, 0, 0.5, 0, 1.5, 0, 1.5, 0;
  Vector d(3);
  d << -20, 0, 10;
  const QQ2Problem p(SymMat(a0), SymMat::identity(3), SymMat::diag(d),
                     ConstraintMode::Equality);
  const int starts = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_local_nonglobal(p, starts, 1234));
  }
}
BENCHMARK(BM_FindLocal)->Arg(25)->Arg(100);

void BM_OracleGrid(benchmark::State& state) {
  const auto p = circle_family();
  const double res = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle_global(p, res));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OracleGrid)->Arg(100)->Arg(200)->Arg(400)->Complexity();

}  // namespace

BENCHMARK_MAIN();
