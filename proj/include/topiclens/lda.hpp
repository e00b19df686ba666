#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "topiclens/bow.hpp"
#include "topiclens/matrix.hpp"

namespace topiclens {

struct LdaConfig {
  int num_topics = 20;
  double alpha = 0.0;  // <= 0 selects 50 / K
  double beta = 0.01;
  int iterations = 1000;
  int burn_in = 500;
  int thin = 10;
  std::uint64_t seed = 42;
  // Document shards per sweep. 1 runs the exact sequential sampler.
  int workers = 1;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 50.0 / num_topics; }
  // Throws UsageError on K < 1, non-positive priors, burn_in >= iterations, thin < 1.
  void validate() const;
};

// Collapsed Gibbs sampler state. Counts are stored word-major (V x K) because
// the sampler reads one word's topic column per token.
struct LdaState {
  int num_topics = 0;
  int vocab_size = 0;
  std::vector<std::vector<TermId>> words;       // expanded token ids per document
  std::vector<std::vector<std::int32_t>> z;     // topic per token position
  Dense<std::int32_t> doc_topic;                // D x K
  Dense<std::int32_t> word_topic;               // V x K
  std::vector<std::int64_t> topic_total;        // K
  std::vector<std::uint64_t> doc_keys;          // per-document RNG stream keys
  std::vector<std::size_t> sweep_order;         // canonical visiting order
  std::uint64_t seed = 0;
  int sweeps_done = 0;

  std::size_t n_docs() const noexcept { return words.size(); }
  std::int32_t n_kw(int k, TermId w) const { return word_topic(static_cast<std::size_t>(w), static_cast<std::size_t>(k)); }
  std::int64_t total_tokens() const;
};

// Every count-table identity the sampler must preserve. Returns an empty string
// when consistent, otherwise a description of the first violation.
std::string check_consistency(const LdaState& state);

struct LdaEstimates {
  DenseMatrix theta;  // D x K, rows sum to 1
  DenseMatrix phi;    // K x V, rows sum to 1

  std::size_t num_topics() const noexcept { return phi.rows(); }
  std::size_t vocab_size() const noexcept { return phi.cols(); }
};

struct LdaFit {
  LdaState state;
  LdaEstimates estimates;
  // relabel[new_id] = topic id during sampling. New ids are ordered by
  // descending token share n_k / N.
  std::vector<int> relabel;
  std::vector<std::size_t> empty_docs;  // uniform theta rows, skipped by the sampler
  int samples_averaged = 0;
};

struct FitObserver {
  // Called after every sweep (1-based) with topics still in sampling order.
  std::function<void(const LdaState&, int sweep)> on_sweep;
};

LdaFit fit(const DocTermMatrix& matrix, const LdaConfig& config, const FitObserver& observer = {});

// Stream key for a document: hash of its id, or of its row index when ids are absent.
std::uint64_t document_key(const DocTermMatrix& matrix, std::size_t d);

// Fresh state with topics drawn uniformly from the seed.
LdaState initialize_state(const DocTermMatrix& matrix, const LdaConfig& config);

// Unnormalized full conditional of token `pos` in document `d`, with that
// token's own assignment excluded from the counts.
std::vector<double> full_conditional(const LdaState& state, std::size_t d, std::size_t pos, double alpha,
                                     double beta);

// log p(w, z) with theta and phi integrated out.
double collapsed_log_likelihood(const LdaState& state, double alpha, double beta);

struct FoldInResult {
  std::vector<double> theta;
  bool empty = false;
};

// Gibbs sampling for a held-out document with phi frozen. The first half of the
// sweeps is burn-in; theta is the posterior mean over the rest.
FoldInResult fold_in(const SparseRow& doc, const LdaEstimates& estimates, const LdaConfig& config, int sweeps,
                     std::uint64_t doc_key = 0);

// Term indices of topic k by descending phi, ties broken by term string.
std::vector<TermId> top_terms(const LdaEstimates& estimates, const Vocabulary& vocab, int k, std::size_t n);

// Token share per topic, n_k / N. Throws DataError when N = 0.
std::vector<double> topic_weights(std::span<const std::int64_t> topic_totals);
std::vector<double> topic_weights(const LdaState& state);

// Persisted model: JSON with config, vocabulary hash, phi, theta, counts and the
// relabeling permutation.
struct LdaModel {
  LdaConfig config;
  std::uint64_t vocab_hash = 0;
  std::vector<std::string> doc_ids;
  LdaEstimates estimates;
  std::vector<std::int64_t> topic_total;
  Dense<std::int32_t> topic_word;  // K x V
  std::vector<int> relabel;
  std::vector<std::size_t> empty_docs;
  int samples_averaged = 0;
};

LdaModel make_model(const LdaFit& fit, const LdaConfig& config, const DocTermMatrix& matrix,
                    const Vocabulary& vocab);
void write_model(std::ostream& out, const LdaModel& model, const std::string& provenance);
LdaModel read_model(std::istream& in);

}  // namespace topiclens
