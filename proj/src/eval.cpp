#include "topiclens/eval.hpp"

#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "topiclens/error.hpp"
#include "topiclens/kernels/cooccurrence.hpp"
#include "topiclens/rng.hpp"

namespace topiclens {

namespace {

PerplexityResult finish(double total_ll, std::int64_t tokens) {
  if (tokens == 0) throw DataError("perplexity: test set has no in-vocabulary tokens");
  PerplexityResult r;
  r.tokens = tokens;
  r.log_likelihood_per_token = total_ll / static_cast<double>(tokens);
  r.perplexity = std::exp(-r.log_likelihood_per_token);
  return r;
}

double doc_log_likelihood(const SparseRow& row, std::span<const double> theta, const DenseMatrix& phi) {
  double ll = 0.0;
  for (const auto& e : row) {
    double p = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) p += theta[k] * phi(k, static_cast<std::size_t>(e.term));
    ll += e.count * std::log(p);
  }
  return ll;
}

}  // namespace

PerplexityResult perplexity_given_theta(const DocTermMatrix& test, const DenseMatrix& theta, const DenseMatrix& phi) {
  if (theta.rows() != test.n_docs() || theta.cols() != phi.rows()) throw DataError("perplexity: dimension mismatch");
  double total = 0.0;
  for (std::size_t d = 0; d < test.n_docs(); ++d) total += doc_log_likelihood(test.rows[d], theta.row(d), phi);
  return finish(total, test.total_tokens);
}

PerplexityResult held_out_perplexity(const DocTermMatrix& test, const LdaEstimates& estimates, const LdaConfig& config,
                                     int fold_in_sweeps) {
  if (test.vocab_size != estimates.vocab_size()) throw DataError("perplexity: test matrix vocabulary differs from model");
  if (test.total_tokens == 0) throw DataError("perplexity: test set has no in-vocabulary tokens");
  const std::size_t D = test.n_docs();
  std::vector<double> per_doc(D, 0.0);
  const auto n = static_cast<std::int64_t>(D);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto d = static_cast<std::size_t>(i);
    if (test.rows[d].empty()) continue;
    const auto theta = fold_in(test.rows[d], estimates, config, fold_in_sweeps, document_key(test, d));
    per_doc[d] = doc_log_likelihood(test.rows[d], theta.theta, estimates.phi);
  }
  // Fixed summation order keeps the result independent of the thread count.
  const double total = std::accumulate(per_doc.begin(), per_doc.end(), 0.0);
  return finish(total, test.total_tokens);
}

namespace {

double umass_from_counts(const Dense<std::int64_t>& counts, const std::vector<TermId>& terms) {
  double score = 0.0;
  for (std::size_t m = 1; m < terms.size(); ++m) {
    for (std::size_t l = 0; l < m; ++l) {
      const auto df = counts(l, l);
      if (df <= 0) {
        throw DataError("umass: top term index " + std::to_string(terms[l]) + " has zero document frequency");
      }
      score += std::log(static_cast<double>(counts(m, l) + 1) / static_cast<double>(df));
    }
  }
  return score;
}

}  // namespace

double umass_score(const DocTermMatrix& matrix, const std::vector<TermId>& terms) {
  if (terms.size() < 2) throw UsageError("umass: need at least two terms");
  const auto counts = kernels::codoc_counts_omp(matrix, {terms});
  return umass_from_counts(counts.front(), terms);
}

std::vector<double> umass_coherence(const DocTermMatrix& matrix, const LdaEstimates& estimates, const Vocabulary& vocab,
                                    std::size_t top_m) {
  if (top_m < 2) throw UsageError("umass: top_m must be >= 2");
  const std::size_t K = estimates.num_topics();
  const std::size_t m = std::min(top_m, estimates.vocab_size());
  std::vector<std::vector<TermId>> lists(K);
  for (std::size_t k = 0; k < K; ++k) lists[k] = top_terms(estimates, vocab, static_cast<int>(k), m);
  const auto counts = kernels::codoc_counts_omp(matrix, lists);
  std::vector<double> scores(K);
  for (std::size_t k = 0; k < K; ++k) scores[k] = umass_from_counts(counts[k], lists[k]);
  return scores;
}

TrainTestSplit split_by_id(const DocTermMatrix& matrix, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw UsageError("split: test fraction must lie in (0, 1)");
  TrainTestSplit split;
  for (std::size_t d = 0; d < matrix.n_docs(); ++d) {
    const std::uint64_t h = mix64(document_key(matrix, d));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    (u < test_fraction ? split.test : split.train).push_back(d);
  }
  return split;
}

std::vector<EvalReport> sweep_k(const DocTermMatrix& matrix, const Vocabulary& vocab, const std::vector<int>& k_grid,
                                const LdaConfig& config_template, const SweepOptions& options) {
  if (k_grid.empty()) throw UsageError("sweep: empty K grid");
  const auto split = split_by_id(matrix, options.test_fraction);
  const DocTermMatrix train = matrix.subset(split.train);
  const DocTermMatrix test = matrix.subset(split.test);
  if (test.total_tokens == 0) throw DataError("sweep: held-out split has no tokens; raise the test fraction");

  std::vector<EvalReport> reports(k_grid.size());
  std::vector<std::exception_ptr> errors(k_grid.size());
  const auto n = static_cast<std::int64_t>(k_grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(i);
    try {
      LdaConfig cfg = config_template;
      cfg.num_topics = k_grid[g];
      // A template alpha of 0 keeps the 50/K default per K.
      const auto fitted = fit(train, cfg);
      const auto ppl = held_out_perplexity(test, fitted.estimates, cfg, options.fold_in_sweeps);
      EvalReport r;
      r.num_topics = cfg.num_topics;
      r.log_perplexity = -ppl.log_likelihood_per_token;
      r.perplexity = ppl.perplexity;
      r.per_topic_coherence = umass_coherence(train, fitted.estimates, vocab, options.top_m);
      r.umass_coherence = std::accumulate(r.per_topic_coherence.begin(), r.per_topic_coherence.end(), 0.0) /
                          static_cast<double>(r.per_topic_coherence.size());
      r.train_docs = train.n_docs();
      r.test_docs = test.n_docs();
      reports[g] = std::move(r);
    } catch (...) {
      errors[g] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

void write_sweep_table(std::ostream& out, const std::vector<EvalReport>& reports, const std::string& provenance) {
  out << "# " << provenance << '\n';
  out << "# protocol: held-out fold-in perplexity (nats/token), UMass coherence on the training split\n";
  out << "K\tlog_perplexity\tperplexity\tmean_coherence\tper_topic_coherence\n";
  for (const auto& r : reports) {
    nlohmann::json per = r.per_topic_coherence;
    out << r.num_topics << '\t' << nlohmann::json(r.log_perplexity).dump() << '\t' << nlohmann::json(r.perplexity).dump()
        << '\t' << nlohmann::json(r.umass_coherence).dump() << '\t' << per.dump() << '\n';
  }
}

}  // namespace topiclens
