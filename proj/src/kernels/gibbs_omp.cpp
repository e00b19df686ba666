#include <algorithm>

#include "gibbs_common.hpp"
#include "topiclens/kernels/gibbs.hpp"

namespace topiclens::kernels {

void gibbs_sweep_sharded(LdaState& state, const GibbsParams& params, int sweep, int workers) {
  const std::size_t n = state.sweep_order.size();
  const std::size_t shards = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n));
  const double vbeta = params.beta * state.vocab_size;

  const std::vector<std::int32_t>& global_wt = state.word_topic.data();
  const std::vector<std::int64_t>& global_tt = state.topic_total;
  std::vector<std::vector<std::int32_t>> local_wt(shards);
  std::vector<std::vector<std::int64_t>> local_tt(shards);

  const auto shard_count = static_cast<std::int64_t>(shards);
#pragma omp parallel for schedule(static, 1)
  for (std::int64_t s = 0; s < shard_count; ++s) {
    const auto shard = static_cast<std::size_t>(s);
    local_wt[shard] = global_wt;
    local_tt[shard] = global_tt;
    const std::size_t begin = n * shard / shards;
    const std::size_t end = n * (shard + 1) / shards;
    std::vector<double> cumulative;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t d = state.sweep_order[i];
      SplitMix64 rng(detail::sweep_stream(state.seed, state.doc_keys[d], sweep));
      detail::sample_document(state.words[d], state.z[d], state.doc_topic.row(d), local_wt[shard].data(),
                              local_tt[shard].data(), state.num_topics, params.alpha, params.beta, vbeta, rng,
                              cumulative);
    }
  }

  // global += sum over shards of (local - global); integer, so order-free.
  std::vector<std::int32_t>& wt = state.word_topic.data();
  const auto cells = static_cast<std::int64_t>(wt.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < cells; ++c) {
    const auto i = static_cast<std::size_t>(c);
    std::int64_t v = wt[i];
    const std::int64_t before = wt[i];
    for (std::size_t s = 0; s < shards; ++s) v += local_wt[s][i] - before;
    wt[i] = static_cast<std::int32_t>(v);
  }
  for (std::size_t k = 0; k < state.topic_total.size(); ++k) {
    const std::int64_t before = state.topic_total[k];
    std::int64_t v = before;
    for (std::size_t s = 0; s < shards; ++s) v += local_tt[s][k] - before;
    state.topic_total[k] = v;
  }
}

}  // namespace topiclens::kernels
