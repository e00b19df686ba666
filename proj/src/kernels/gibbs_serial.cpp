#include "gibbs_common.hpp"
#include "topiclens/kernels/gibbs.hpp"

namespace topiclens::kernels {

void gibbs_sweep_serial(LdaState& state, const GibbsParams& params, int sweep) {
  const double vbeta = params.beta * state.vocab_size;
  std::vector<double> cumulative;
  for (std::size_t d : state.sweep_order) {
    SplitMix64 rng(detail::sweep_stream(state.seed, state.doc_keys[d], sweep));
    detail::sample_document(state.words[d], state.z[d], state.doc_topic.row(d), state.word_topic.data().data(),
                            state.topic_total.data(), state.num_topics, params.alpha, params.beta, vbeta, rng,
                            cumulative);
  }
}

}  // namespace topiclens::kernels
