#include <random>

#include <benchmark/benchmark.h>

#include "common.hpp"
#include "topiclens/kernels/cooccurrence.hpp"
#include "topiclens/kernels/gibbs.hpp"
#include "topiclens/kernels/jsd.hpp"
#include "topiclens/kernels/rank_corr.hpp"
#include "topiclens/lda.hpp"

using namespace topiclens;

namespace {

const testutil::PlantedCorpus& corpus() {
  static const auto pc = testutil::planted_corpus(2000, std::vector<std::size_t>(20, 50), 120, 0.1, 11);
  return pc;
}

DenseMatrix random_stochastic(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(0.1, 1.0);
  DenseMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += (m(r, c) = g(rng) + 1e-12);
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= s;
  }
  return m;
}

void BM_GibbsSerial(benchmark::State& st) {
  LdaConfig cfg;
  cfg.num_topics = 20;
  auto state = initialize_state(corpus().matrix, cfg);
  const kernels::GibbsParams p{cfg.effective_alpha(), cfg.beta};
  int sweep = 0;
  for (auto _ : st) kernels::gibbs_sweep_serial(state, p, ++sweep);
  st.SetItemsProcessed(st.iterations() * corpus().matrix.total_tokens);
}

void BM_GibbsSharded(benchmark::State& st) {
  LdaConfig cfg;
  cfg.num_topics = 20;
  auto state = initialize_state(corpus().matrix, cfg);
  const kernels::GibbsParams p{cfg.effective_alpha(), cfg.beta};
  int sweep = 0;
  for (auto _ : st) kernels::gibbs_sweep_sharded(state, p, ++sweep, static_cast<int>(st.range(0)));
  st.SetItemsProcessed(st.iterations() * corpus().matrix.total_tokens);
}

void BM_JsdSerial(benchmark::State& st) {
  const auto phi = random_stochastic(static_cast<std::size_t>(st.range(0)), 5000, 3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::jsd_matrix_serial(phi));
}

void BM_JsdOmp(benchmark::State& st) {
  const auto phi = random_stochastic(static_cast<std::size_t>(st.range(0)), 5000, 3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::jsd_matrix_omp(phi));
}

std::vector<std::vector<TermId>> term_lists() {
  std::vector<std::vector<TermId>> lists;
  for (TermId k = 0; k < 20; ++k) {
    std::vector<TermId> l;
    for (TermId i = 0; i < 10; ++i) l.push_back(k * 50 + i);
    lists.push_back(l);
  }
  return lists;
}

void BM_CoDocSerial(benchmark::State& st) {
  const auto lists = term_lists();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::codoc_counts_serial(corpus().matrix, lists));
}

void BM_CoDocOmp(benchmark::State& st) {
  const auto lists = term_lists();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::codoc_counts_omp(corpus().matrix, lists));
}

void BM_CorrSerial(benchmark::State& st) {
  const auto a = random_stochastic(static_cast<std::size_t>(st.range(0)), 100, 5);
  const auto b = random_stochastic(static_cast<std::size_t>(st.range(0)), 2, 6);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::column_correlations_serial(a, b));
}

void BM_CorrOmp(benchmark::State& st) {
  const auto a = random_stochastic(static_cast<std::size_t>(st.range(0)), 100, 5);
  const auto b = random_stochastic(static_cast<std::size_t>(st.range(0)), 2, 6);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::column_correlations_omp(a, b));
}

}  // namespace

BENCHMARK(BM_GibbsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GibbsSharded)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JsdSerial)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JsdOmp)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoDocSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoDocOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrSerial)->Arg(503)->Arg(5000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CorrOmp)->Arg(503)->Arg(5000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
