#include "topiclens/lda.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "kernels/gibbs_common.hpp"
#include "topiclens/error.hpp"
#include "topiclens/kernels/gibbs.hpp"
#include "topiclens/rng.hpp"

namespace topiclens {

namespace {

constexpr std::uint64_t kFoldInSalt = 0x666f6c642d696eULL;  // "fold-in"

void normalize_row(std::span<double> row) {
  const double s = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& v : row) v /= s;
}

}  // namespace

void LdaConfig::validate() const {
  if (num_topics < 1) throw UsageError("lda: number of topics must be >= 1");
  if (!(effective_alpha() > 0.0) || !std::isfinite(effective_alpha())) throw UsageError("lda: alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw UsageError("lda: beta must be > 0");
  if (iterations < 1) throw UsageError("lda: iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) throw UsageError("lda: burn_in must lie in [0, iterations)");
  if (thin < 1) throw UsageError("lda: thin must be >= 1");
  if (workers < 1) throw UsageError("lda: workers must be >= 1");
}

std::int64_t LdaState::total_tokens() const {
  return std::accumulate(topic_total.begin(), topic_total.end(), std::int64_t{0});
}

std::string check_consistency(const LdaState& s) {
  const auto K = static_cast<std::size_t>(s.num_topics);
  const auto V = static_cast<std::size_t>(s.vocab_size);
  Dense<std::int32_t> dt(s.n_docs(), K);
  Dense<std::int32_t> wt(V, K);
  std::vector<std::int64_t> tt(K, 0);
  for (std::size_t d = 0; d < s.n_docs(); ++d) {
    if (s.z[d].size() != s.words[d].size()) return "doc " + std::to_string(d) + ": z and words differ in length";
    for (std::size_t i = 0; i < s.words[d].size(); ++i) {
      const auto k = s.z[d][i];
      if (k < 0 || static_cast<std::size_t>(k) >= K) return "doc " + std::to_string(d) + ": topic out of range";
      ++dt(d, static_cast<std::size_t>(k));
      ++wt(static_cast<std::size_t>(s.words[d][i]), static_cast<std::size_t>(k));
      ++tt[static_cast<std::size_t>(k)];
    }
    std::int64_t row = 0;
    for (std::size_t k = 0; k < K; ++k) row += s.doc_topic(d, k);
    if (row != static_cast<std::int64_t>(s.words[d].size())) return "doc " + std::to_string(d) + ": n_dk does not sum to length";
  }
  if (!(dt == s.doc_topic)) return "n_dk disagrees with z";
  if (!(wt == s.word_topic)) return "n_kw disagrees with z";
  if (tt != s.topic_total) return "n_k disagrees with z";
  for (std::size_t k = 0; k < K; ++k) {
    std::int64_t col = 0;
    for (std::size_t w = 0; w < V; ++w) col += s.word_topic(w, k);
    if (col != s.topic_total[k]) return "sum_w n_kw != n_k for topic " + std::to_string(k);
  }
  std::int64_t n = 0;
  for (const auto& w : s.words) n += static_cast<std::int64_t>(w.size());
  if (s.total_tokens() != n) return "sum_k n_k != N";
  return {};
}

std::uint64_t document_key(const DocTermMatrix& matrix, std::size_t d) {
  if (!matrix.doc_ids.empty()) return fnv1a(matrix.doc_ids[d]);
  return fnv1a(std::to_string(d));
}

LdaState initialize_state(const DocTermMatrix& matrix, const LdaConfig& config) {
  LdaState s;
  s.num_topics = config.num_topics;
  s.vocab_size = static_cast<int>(matrix.vocab_size);
  s.seed = config.seed;
  const std::size_t D = matrix.n_docs();
  const auto K = static_cast<std::size_t>(config.num_topics);
  s.words.resize(D);
  s.z.resize(D);
  s.doc_topic = Dense<std::int32_t>(D, K);
  s.word_topic = Dense<std::int32_t>(matrix.vocab_size, K);
  s.topic_total.assign(K, 0);
  s.doc_keys.resize(D);

  for (std::size_t d = 0; d < D; ++d) {
    s.doc_keys[d] = document_key(matrix, d);
    for (const auto& e : matrix.rows[d]) s.words[d].insert(s.words[d].end(), static_cast<std::size_t>(e.count), e.term);
    SplitMix64 rng(kernels::detail::sweep_stream(s.seed, s.doc_keys[d], 0));
    s.z[d].resize(s.words[d].size());
    for (std::size_t i = 0; i < s.words[d].size(); ++i) {
      const auto k = static_cast<std::size_t>(rng.below(K));
      s.z[d][i] = static_cast<std::int32_t>(k);
      ++s.doc_topic(d, k);
      ++s.word_topic(static_cast<std::size_t>(s.words[d][i]), k);
      ++s.topic_total[k];
    }
    if (!s.words[d].empty()) s.sweep_order.push_back(d);
  }
  // Visiting order depends only on document identity, never on input position.
  std::sort(s.sweep_order.begin(), s.sweep_order.end(), [&](std::size_t a, std::size_t b) {
    if (s.doc_keys[a] != s.doc_keys[b]) return s.doc_keys[a] < s.doc_keys[b];
    if (!matrix.doc_ids.empty()) return matrix.doc_ids[a] < matrix.doc_ids[b];
    return a < b;
  });
  return s;
}

std::vector<double> full_conditional(const LdaState& s, std::size_t d, std::size_t pos, double alpha, double beta) {
  const auto K = static_cast<std::size_t>(s.num_topics);
  const auto w = static_cast<std::size_t>(s.words[d][pos]);
  const auto own = static_cast<std::size_t>(s.z[d][pos]);
  const double vbeta = beta * s.vocab_size;
  std::vector<double> p(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double self = k == own ? 1.0 : 0.0;
    p[k] = (s.doc_topic(d, k) - self + alpha) * (s.word_topic(w, k) - self + beta) /
           (static_cast<double>(s.topic_total[k]) - self + vbeta);
  }
  return p;
}

double collapsed_log_likelihood(const LdaState& s, double alpha, double beta) {
  const auto K = static_cast<std::size_t>(s.num_topics);
  const auto V = static_cast<std::size_t>(s.vocab_size);
  const double vbeta = V * beta;
  const double kalpha = K * alpha;
  double ll = static_cast<double>(K) * (std::lgamma(vbeta) - static_cast<double>(V) * std::lgamma(beta));
  for (std::size_t k = 0; k < K; ++k) {
    double acc = 0.0;
    for (std::size_t w = 0; w < V; ++w) acc += std::lgamma(s.word_topic(w, k) + beta);
    ll += acc - std::lgamma(static_cast<double>(s.topic_total[k]) + vbeta);
  }
  for (std::size_t d = 0; d < s.n_docs(); ++d) {
    if (s.words[d].empty()) continue;
    double acc = std::lgamma(kalpha) - static_cast<double>(K) * std::lgamma(alpha);
    for (std::size_t k = 0; k < K; ++k) acc += std::lgamma(s.doc_topic(d, k) + alpha);
    ll += acc - std::lgamma(static_cast<double>(s.words[d].size()) + kalpha);
  }
  return ll;
}

namespace {

void accumulate_sample(const LdaState& s, double alpha, double beta, DenseMatrix& theta_acc, DenseMatrix& phi_acc) {
  const auto K = static_cast<std::size_t>(s.num_topics);
  const auto V = static_cast<std::size_t>(s.vocab_size);
  const double kalpha = K * alpha;
  const double vbeta = V * beta;
  for (std::size_t d = 0; d < s.n_docs(); ++d) {
    const double denom = static_cast<double>(s.words[d].size()) + kalpha;
    for (std::size_t k = 0; k < K; ++k) theta_acc(d, k) += (s.doc_topic(d, k) + alpha) / denom;
  }
  for (std::size_t k = 0; k < K; ++k) {
    const double denom = static_cast<double>(s.topic_total[k]) + vbeta;
    for (std::size_t w = 0; w < V; ++w) phi_acc(k, w) += (s.word_topic(w, k) + beta) / denom;
  }
}

// relabel[new] = old, by descending n_k with ties on the old index.
std::vector<int> prevalence_order(const std::vector<std::int64_t>& topic_total) {
  std::vector<int> order(topic_total.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return topic_total[static_cast<std::size_t>(a)] > topic_total[static_cast<std::size_t>(b)];
  });
  return order;
}

void permute_state(LdaState& s, const std::vector<int>& relabel) {
  const auto K = static_cast<std::size_t>(s.num_topics);
  std::vector<std::int32_t> new_id(K);
  for (std::size_t n = 0; n < K; ++n) new_id[static_cast<std::size_t>(relabel[n])] = static_cast<std::int32_t>(n);
  auto permute_columns = [&](Dense<std::int32_t>& m) {
    Dense<std::int32_t> out(m.rows(), K);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t n = 0; n < K; ++n) out(r, n) = m(r, static_cast<std::size_t>(relabel[n]));
    }
    m = std::move(out);
  };
  permute_columns(s.doc_topic);
  permute_columns(s.word_topic);
  std::vector<std::int64_t> tt(K);
  for (std::size_t n = 0; n < K; ++n) tt[n] = s.topic_total[static_cast<std::size_t>(relabel[n])];
  s.topic_total = std::move(tt);
  for (auto& zd : s.z) {
    for (auto& k : zd) k = new_id[static_cast<std::size_t>(k)];
  }
}

}  // namespace

LdaFit fit(const DocTermMatrix& matrix, const LdaConfig& config, const FitObserver& observer) {
  config.validate();
  if (matrix.n_docs() == 0 || matrix.total_tokens == 0) throw DataError("lda: document-term matrix is empty");
  if (matrix.vocab_size == 0) throw DataError("lda: vocabulary is empty");
  if (static_cast<std::int64_t>(config.num_topics) > matrix.total_tokens) {
    throw DataError("lda: K = " + std::to_string(config.num_topics) + " exceeds the token count N = " +
                    std::to_string(matrix.total_tokens));
  }
  const double alpha = config.effective_alpha();
  const kernels::GibbsParams params{alpha, config.beta};
  const auto K = static_cast<std::size_t>(config.num_topics);
  const std::size_t D = matrix.n_docs();
  const std::size_t V = matrix.vocab_size;

  LdaFit result;
  LdaState& state = result.state;
  state = initialize_state(matrix, config);

  DenseMatrix theta_acc(D, K);
  DenseMatrix phi_acc(K, V);
  int samples = 0;
  for (int sweep = 1; sweep <= config.iterations; ++sweep) {
    if (config.workers == 1) {
      kernels::gibbs_sweep_serial(state, params, sweep);
    } else {
      kernels::gibbs_sweep_sharded(state, params, sweep, config.workers);
    }
    state.sweeps_done = sweep;
#ifndef NDEBUG
    if (auto msg = check_consistency(state); !msg.empty()) throw NumericError("lda: count tables inconsistent: " + msg);
#endif
    if (observer.on_sweep) observer.on_sweep(state, sweep);
    if (sweep > config.burn_in && (sweep - config.burn_in) % config.thin == 0) {
      accumulate_sample(state, alpha, config.beta, theta_acc, phi_acc);
      ++samples;
    }
  }
  if (samples == 0) {
    accumulate_sample(state, alpha, config.beta, theta_acc, phi_acc);
    samples = 1;
  }
  result.samples_averaged = samples;

  result.relabel = prevalence_order(state.topic_total);
  permute_state(state, result.relabel);

  auto& est = result.estimates;
  est.theta = DenseMatrix(D, K);
  est.phi = DenseMatrix(K, V);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t n = 0; n < K; ++n) est.theta(d, n) = theta_acc(d, static_cast<std::size_t>(result.relabel[n])) / samples;
    normalize_row(est.theta.row(d));
  }
  for (std::size_t n = 0; n < K; ++n) {
    const auto old = static_cast<std::size_t>(result.relabel[n]);
    for (std::size_t w = 0; w < V; ++w) est.phi(n, w) = phi_acc(old, w) / samples;
    normalize_row(est.phi.row(n));
  }
  for (std::size_t d : matrix.empty_rows) {
    result.empty_docs.push_back(d);
    for (std::size_t k = 0; k < K; ++k) est.theta(d, k) = 1.0 / static_cast<double>(K);
  }
  return result;
}

FoldInResult fold_in(const SparseRow& doc, const LdaEstimates& estimates, const LdaConfig& config, int sweeps,
                     std::uint64_t doc_key) {
  const std::size_t K = estimates.num_topics();
  if (K == 0) throw UsageError("fold_in: estimates have no topics");
  if (sweeps < 1) throw UsageError("fold_in: sweeps must be >= 1");
  FoldInResult out;
  std::vector<TermId> words;
  for (const auto& e : doc) {
    if (e.term < 0 || static_cast<std::size_t>(e.term) >= estimates.vocab_size()) {
      throw DataError("fold_in: term index outside the model vocabulary");
    }
    words.insert(words.end(), static_cast<std::size_t>(e.count), e.term);
  }
  if (words.empty()) {
    out.theta.assign(K, 1.0 / static_cast<double>(K));
    out.empty = true;
    return out;
  }
  const double alpha = config.alpha > 0.0 ? config.alpha : 50.0 / static_cast<double>(K);
  const double kalpha = static_cast<double>(K) * alpha;
  const std::uint64_t seed = combine_seed(config.seed, kFoldInSalt);

  std::vector<std::int32_t> n_dk(K, 0);
  std::vector<std::int32_t> z(words.size());
  {
    SplitMix64 rng(kernels::detail::sweep_stream(seed, doc_key, 0));
    for (std::size_t i = 0; i < words.size(); ++i) {
      z[i] = static_cast<std::int32_t>(rng.below(K));
      ++n_dk[static_cast<std::size_t>(z[i])];
    }
  }
  const int burn = sweeps / 2;
  std::vector<double> acc(K, 0.0);
  std::vector<double> cumulative(K);
  int samples = 0;
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    SplitMix64 rng(kernels::detail::sweep_stream(seed, doc_key, sweep));
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto w = static_cast<std::size_t>(words[i]);
      --n_dk[static_cast<std::size_t>(z[i])];
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        total += (n_dk[k] + alpha) * estimates.phi(k, w);
        cumulative[k] = total;
      }
      const int next = kernels::detail::draw_from_cumulative(cumulative, rng);
      z[i] = next;
      ++n_dk[static_cast<std::size_t>(next)];
    }
    if (sweep > burn) {
      const double denom = static_cast<double>(words.size()) + kalpha;
      for (std::size_t k = 0; k < K; ++k) acc[k] += (n_dk[k] + alpha) / denom;
      ++samples;
    }
  }
  out.theta.resize(K);
  for (std::size_t k = 0; k < K; ++k) out.theta[k] = acc[k] / samples;
  normalize_row(out.theta);
  return out;
}

std::vector<TermId> top_terms(const LdaEstimates& estimates, const Vocabulary& vocab, int k, std::size_t n) {
  if (k < 0 || static_cast<std::size_t>(k) >= estimates.num_topics()) {
    throw UsageError("top_terms: topic " + std::to_string(k) + " out of range");
  }
  const std::size_t V = estimates.vocab_size();
  if (vocab.size() != V) throw DataError("top_terms: vocabulary size does not match phi");
  if (n > V) throw UsageError("top_terms: n exceeds the vocabulary size");
  const auto row = estimates.phi.row(static_cast<std::size_t>(k));
  std::vector<TermId> ids(V);
  std::iota(ids.begin(), ids.end(), 0);
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(), [&](TermId a, TermId b) {
    const double pa = row[static_cast<std::size_t>(a)];
    const double pb = row[static_cast<std::size_t>(b)];
    if (pa != pb) return pa > pb;
    return vocab.term(static_cast<std::size_t>(a)) < vocab.term(static_cast<std::size_t>(b));
  });
  ids.resize(n);
  return ids;
}

std::vector<double> topic_weights(std::span<const std::int64_t> topic_totals) {
  const std::int64_t n = std::accumulate(topic_totals.begin(), topic_totals.end(), std::int64_t{0});
  if (n <= 0) throw DataError("topic_weights: no tokens assigned (N = 0)");
  std::vector<double> w(topic_totals.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = static_cast<double>(topic_totals[k]) / static_cast<double>(n);
  return w;
}

std::vector<double> topic_weights(const LdaState& state) { return topic_weights(std::span<const std::int64_t>(state.topic_total)); }

LdaModel make_model(const LdaFit& fit, const LdaConfig& config, const DocTermMatrix& matrix, const Vocabulary& vocab) {
  LdaModel m;
  m.config = config;
  m.vocab_hash = vocab.hash();
  m.doc_ids = matrix.doc_ids;
  m.estimates = fit.estimates;
  m.topic_total = fit.state.topic_total;
  const auto K = static_cast<std::size_t>(fit.state.num_topics);
  const auto V = static_cast<std::size_t>(fit.state.vocab_size);
  m.topic_word = Dense<std::int32_t>(K, V);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t w = 0; w < V; ++w) m.topic_word(k, w) = fit.state.word_topic(w, k);
  }
  m.relabel = fit.relabel;
  m.empty_docs = fit.empty_docs;
  m.samples_averaged = fit.samples_averaged;
  return m;
}

namespace {

using nlohmann::json;

json dense_to_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

DenseMatrix dense_from_json(const json& j, std::size_t rows, std::size_t cols, const char* what) {
  if (!j.is_array() || j.size() != rows) throw DataError(std::string("model: ") + what + " has wrong row count");
  DenseMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw DataError(std::string("model: ") + what + " has wrong column count");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

void write_model(std::ostream& out, const LdaModel& m, const std::string& provenance) {
  const std::size_t K = m.estimates.num_topics();
  json counts = json::array();
  for (std::size_t k = 0; k < K; ++k) counts.push_back(std::vector<std::int32_t>(m.topic_word.row(k).begin(), m.topic_word.row(k).end()));
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx", static_cast<unsigned long long>(m.vocab_hash));
  json j = {
      {"format", "topiclens-lda-model"},
      {"format_version", 1},
      {"provenance", provenance},
      {"config",
       {{"num_topics", m.config.num_topics},
        {"alpha", m.config.effective_alpha()},
        {"beta", m.config.beta},
        {"iterations", m.config.iterations},
        {"burn_in", m.config.burn_in},
        {"thin", m.config.thin},
        {"seed", m.config.seed},
        {"workers", m.config.workers}}},
      {"vocab_hash", hash_hex},
      {"num_docs", m.estimates.theta.rows()},
      {"vocab_size", m.estimates.vocab_size()},
      {"samples_averaged", m.samples_averaged},
      {"relabel", m.relabel},
      {"empty_docs", m.empty_docs},
      {"topic_total", m.topic_total},
      {"topic_word", std::move(counts)},
      {"doc_ids", m.doc_ids},
      {"phi", dense_to_json(m.estimates.phi)},
      {"theta", dense_to_json(m.estimates.theta)},
  };
  out << j.dump() << '\n';
}

LdaModel read_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(std::string("model: malformed JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "topiclens-lda-model") throw DataError("model: unknown format");
    LdaModel m;
    const auto& c = j.at("config");
    m.config.num_topics = c.at("num_topics").get<int>();
    m.config.alpha = c.at("alpha").get<double>();
    m.config.beta = c.at("beta").get<double>();
    m.config.iterations = c.at("iterations").get<int>();
    m.config.burn_in = c.at("burn_in").get<int>();
    m.config.thin = c.at("thin").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.workers = c.at("workers").get<int>();
    m.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16);
    const auto D = j.at("num_docs").get<std::size_t>();
    const auto V = j.at("vocab_size").get<std::size_t>();
    const auto K = static_cast<std::size_t>(m.config.num_topics);
    m.samples_averaged = j.at("samples_averaged").get<int>();
    m.relabel = j.at("relabel").get<std::vector<int>>();
    m.empty_docs = j.at("empty_docs").get<std::vector<std::size_t>>();
    m.topic_total = j.at("topic_total").get<std::vector<std::int64_t>>();
    m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    m.estimates.phi = dense_from_json(j.at("phi"), K, V, "phi");
    m.estimates.theta = dense_from_json(j.at("theta"), D, K, "theta");
    m.topic_word = Dense<std::int32_t>(K, V);
    const auto& tw = j.at("topic_word");
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t w = 0; w < V; ++w) m.topic_word(k, w) = tw.at(k).at(w).get<std::int32_t>();
    }
    if (m.topic_total.size() != K || m.relabel.size() != K || m.doc_ids.size() != D) {
      throw DataError("model: inconsistent dimensions");
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: missing or mistyped field: ") + e.what());
  }
}

}  // namespace topiclens
