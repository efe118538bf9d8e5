#include <benchmark/benchmark.h>

#include <random>

#include "fjq/dirac.hpp"
#include "fjq/fj.hpp"
#include "fjq/inversion.hpp"
#include "fjq/kernel_matrix.hpp"
#include "fjq/model.hpp"

using namespace fjq;

namespace {

KernelMatrix random_matrix(std::size_t n, unsigned seed) {
  static const char* forms[] = {"1", "D(1)", "D(2)", "Lambda", "D(1) - 2*D(2)", "D(1)*D(2)*invlap"};
  std::mt19937 rng(seed);
  std::vector<Label> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    rows.emplace_back("r", static_cast<int>(i));
    cols.emplace_back("c", static_cast<int>(i));
  }
  KernelMatrix m(rows, cols);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rng() % 3 == 0) m.at(i, j) = parse_op(forms[rng() % 6]);
  return m;
}

// b takes a's column labels so the product is defined
std::pair<KernelMatrix, KernelMatrix> operands(std::size_t n) {
  KernelMatrix a = random_matrix(n, 1), src = random_matrix(n, 2);
  KernelMatrix b(a.cols(), src.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b.at(i, j) = src.at(i, j);
  return {a, b};
}

void BM_matmul(benchmark::State& s) {
  auto [a, b] = operands(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(matmul(a, b));
}

void BM_matmul_reference(benchmark::State& s) {
  auto [a, b] = operands(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(matmul_reference(a, b));
}

const KernelMatrix& coulomb_matrix() {
  static KernelMatrix m = [] {
    ModelSpec cfg = load_model("abelian-exotic-config");
    return symplectic_matrix(*run_fj(cfg.initial, cfg.fj, "coulomb").fixed);
  }();
  return m;
}

void BM_invert(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(invert_constant(coulomb_matrix(), {s.range(0) != 0}));
}

void BM_null_space(benchmark::State& s) {
  ModelSpec cfg = load_model("abelian-exotic-config");
  KernelMatrix m = symplectic_matrix(cfg.initial);
  for (auto _ : s) benchmark::DoNotOptimize(left_null_space(m, {s.range(0) != 0}));
}

void BM_fj_temporal(benchmark::State& s) {
  ModelSpec cfg = load_model("abelian-exotic-config");
  for (auto _ : s) benchmark::DoNotOptimize(run_fj(cfg.initial, cfg.fj, "temporal"));
}

void BM_dirac(benchmark::State& s) {
  ModelSpec m = load_model("abelian-exotic-dirac");
  for (auto _ : s) benchmark::DoNotOptimize(run_dirac(m.dirac, "temporal-coulomb"));
}

}  // namespace

BENCHMARK(BM_matmul)->Arg(8)->Arg(24)->Arg(48);
BENCHMARK(BM_matmul_reference)->Arg(8)->Arg(24)->Arg(48);
BENCHMARK(BM_invert)->ArgName("parallel")->Arg(0)->Arg(1);
BENCHMARK(BM_null_space)->ArgName("parallel")->Arg(0)->Arg(1);
BENCHMARK(BM_fj_temporal);
BENCHMARK(BM_dirac);

BENCHMARK_MAIN();
