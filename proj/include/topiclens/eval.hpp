#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "topiclens/bow.hpp"
#include "topiclens/lda.hpp"

namespace topiclens {

struct PerplexityResult {
  double log_likelihood_per_token = 0.0;  // mean natural-log likelihood, <= 0
  double perplexity = 1.0;                // exp(-log_likelihood_per_token)
  std::int64_t tokens = 0;
};

constexpr int kDefaultFoldInSweeps = 50;

// Held-out likelihood: theta by fold_in, p(w|d) = sum_k theta_dk phi_kw.
// Throws DataError when the test set has no tokens.
PerplexityResult held_out_perplexity(const DocTermMatrix& test, const LdaEstimates& estimates,
                                     const LdaConfig& config, int fold_in_sweeps = kDefaultFoldInSweeps);

// Same, with theta supplied directly (one row per test document).
PerplexityResult perplexity_given_theta(const DocTermMatrix& test, const DenseMatrix& theta,
                                        const DenseMatrix& phi);

constexpr std::size_t kDefaultTopM = 10;

// UMass coherence of one ordered term list:
//   sum_{m=2..M} sum_{l<m} log((D(w_m, w_l) + 1) / D(w_l))
// with document (co-)frequencies taken from `matrix`.
double umass_score(const DocTermMatrix& matrix, const std::vector<TermId>& terms);

// Per-topic UMass coherence over each topic's top_m terms by phi.
std::vector<double> umass_coherence(const DocTermMatrix& matrix, const LdaEstimates& estimates,
                                    const Vocabulary& vocab, std::size_t top_m = kDefaultTopM);

struct EvalReport {
  int num_topics = 0;
  double log_perplexity = 0.0;  // nats per held-out token
  double perplexity = 0.0;
  double umass_coherence = 0.0;  // mean over topics
  std::vector<double> per_topic_coherence;
  std::size_t train_docs = 0;
  std::size_t test_docs = 0;
};

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Deterministic split on a hash of each document id.
TrainTestSplit split_by_id(const DocTermMatrix& matrix, double test_fraction);

struct SweepOptions {
  double test_fraction = 0.1;
  std::size_t top_m = kDefaultTopM;
  int fold_in_sweeps = kDefaultFoldInSweeps;
};

// Fits one model per K on the same split and seed and evaluates each.
// Models for different K are fitted concurrently.
std::vector<EvalReport> sweep_k(const DocTermMatrix& matrix, const Vocabulary& vocab, const std::vector<int>& k_grid,
                                const LdaConfig& config_template, const SweepOptions& options = {});

// TSV: K, log_perplexity, perplexity, mean_coherence, per_topic_coherence (JSON array).
void write_sweep_table(std::ostream& out, const std::vector<EvalReport>& reports, const std::string& provenance);

}  // namespace topiclens
