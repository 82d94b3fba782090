// Serial reference vs OpenMP variant of the hot kernels. The second benchmark
// argument selects the variant: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "uhf/closure.hpp"
#include "uhf/fock.hpp"
#include "uhf/kernels.hpp"
#include "uhf/oracle.hpp"
#include "uhf/random.hpp"

namespace {

using namespace uhf;

kernels::Exec exec_of(const benchmark::State& st) {
  return st.range(1) ? kernels::Exec::parallel : kernels::Exec::serial;
}

lindblad::Lindbladian two_site_generator(const ParamsPtr& p) {
  auto r = 0.5 * LocalOperator::site_op(p, Site::origin(), 1, 0) +
           0.5 * LocalOperator::site_op(p, Site::along(0, 1), 1, 1);
  return lindblad::Lindbladian::translation_covariant(lindblad::KrausFamily::make({r}, false));
}

void BM_superoperator(benchmark::State& st) {
  auto p = AlgebraParams::make(2, 1);
  auto L = two_site_generator(p);
  oracle::SiteWindow w(line_sites(0, static_cast<std::int64_t>(st.range(0))));
  for (auto _ : st) {
    benchmark::DoNotOptimize(oracle::superoperator(L.kraus_terms(), p, w, oracle::Closure::interior, exec_of(st)));
  }
}
BENCHMARK(BM_superoperator)->ArgsProduct({{3, 4}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_pair_rhs(benchmark::State& st) {
  auto p = AlgebraParams::make(2, 1);
  auto L = two_site_generator(p);
  auto sys = fock::build_generator_system(L, oracle::SiteWindow(line_sites(0, static_cast<std::int64_t>(st.range(0)))));
  std::vector<kernels::SparseMatrix> D, Dd;
  for (std::size_t j = 0; j < sys.noise_count(); ++j) {
    D.push_back(sys.D(j));
    Dd.push_back(sys.Dd(j));
  }
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Random(sys.size(), sys.size());
  Eigen::MatrixXcd out;
  for (auto _ : st) {
    kernels::pair_rhs(sys.L(), Dd, D, G, out, exec_of(st));
    benchmark::DoNotOptimize(out.data());
  }
  st.counters["basis"] = static_cast<double>(sys.size());
}
BENCHMARK(BM_pair_rhs)->ArgsProduct({{3, 4, 5}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_build_closure(benchmark::State& st) {
  auto p = AlgebraParams::make(2, 1);
  auto L = two_site_generator(p);
  oracle::SiteWindow w(line_sites(0, static_cast<std::int64_t>(st.range(0))));
  for (auto _ : st) {
    benchmark::DoNotOptimize(fock::build_generator_system(L, w, {}, 1 << 16, exec_of(st)));
  }
}
BENCHMARK(BM_build_closure)->ArgsProduct({{3, 4, 5}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
