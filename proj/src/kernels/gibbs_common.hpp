#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "topiclens/bow.hpp"
#include "topiclens/rng.hpp"

namespace topiclens::kernels::detail {

inline std::uint64_t sweep_stream(std::uint64_t seed, std::uint64_t doc_key, int sweep) {
  return combine_seed(combine_seed(seed, doc_key), static_cast<std::uint64_t>(sweep));
}

// Draws k with probability weights[k] / total from cumulative sums.
inline int draw_from_cumulative(std::span<const double> cumulative, SplitMix64& rng) {
  const double u = rng.uniform() * cumulative.back();
  int k = 0;
  const int last = static_cast<int>(cumulative.size()) - 1;
  while (k < last && cumulative[static_cast<std::size_t>(k)] <= u) ++k;
  return k;
}

// One pass over a document's tokens:
//   p(z = k) ∝ (n_dk + alpha) (n_kw + beta) / (n_k + V beta)
// with the current token removed from all three counts.
inline void sample_document(std::span<const TermId> words, std::span<std::int32_t> z, std::span<std::int32_t> doc_topic,
                            std::int32_t* word_topic, std::int64_t* topic_total, int num_topics, double alpha,
                            double beta, double vbeta, SplitMix64& rng, std::vector<double>& cumulative) {
  const auto K = static_cast<std::size_t>(num_topics);
  cumulative.resize(K);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto w = static_cast<std::size_t>(words[i]);
    std::int32_t* wt = word_topic + w * K;
    const auto old = static_cast<std::size_t>(z[i]);
    --doc_topic[old];
    --wt[old];
    --topic_total[old];

    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      acc += (doc_topic[k] + alpha) * (wt[k] + beta) / (static_cast<double>(topic_total[k]) + vbeta);
      cumulative[k] = acc;
    }
    const auto next = static_cast<std::size_t>(draw_from_cumulative(cumulative, rng));

    z[i] = static_cast<std::int32_t>(next);
    ++doc_topic[next];
    ++wt[next];
    ++topic_total[next];
  }
}

}  // namespace topiclens::kernels::detail
