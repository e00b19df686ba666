#include "topiclens/vis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topiclens/error.hpp"

namespace topiclens {

using nlohmann::json;

json make_vis_payload(const TopicSpace& space, const DenseMatrix& phi, const Vocabulary& vocab, std::size_t top_r,
                      double default_lambda, const VisMetadata& meta) {
  const std::size_t K = phi.rows();
  const std::size_t V = phi.cols();
  if (vocab.size() != V) throw DataError("vis payload: vocabulary size does not match phi");
  if (space.weights.size() != K || space.mds.coords.rows() != K) throw DataError("vis payload: topic space does not match phi");
  top_r = std::min(top_r, V);

  json topics = json::array();
  for (std::size_t k = 0; k < K; ++k) {
    const double x = space.mds.coords(k, 0);
    const double y = space.mds.coords.cols() > 1 ? space.mds.coords(k, 1) : 0.0;
    topics.push_back({{"id", k + 1}, {"x", x}, {"y", y}, {"weight", space.weights[k]}});
  }

  LdaEstimates est;
  est.phi = phi;
  std::vector<char> used(V, 0);
  json topic_terms = json::array();
  for (std::size_t k = 0; k < K; ++k) {
    const auto ids = top_terms(est, vocab, static_cast<int>(k), top_r);
    json terms = json::array();
    for (TermId w : ids) {
      const auto u = static_cast<std::size_t>(w);
      used[u] = 1;
      terms.push_back({{"term", vocab.term(u)}, {"phi", phi(k, u)}, {"corpus_frequency", vocab[u].corpus_frequency}});
    }
    topic_terms.push_back({{"topic", k + 1}, {"terms", std::move(terms)}});
  }

  // Overall frequencies for every term that appears in some top-R list, in vocabulary order.
  json vocab_json = json::array();
  for (std::size_t w = 0; w < V; ++w) {
    if (used[w]) vocab_json.push_back({{"term", vocab.term(w)}, {"corpus_frequency", vocab[w].corpus_frequency}});
  }

  return json{{"schema_version", kVisSchemaVersion},
              {"metadata",
               {{"K", meta.num_topics},
                {"seed", meta.seed},
                {"config_hash", meta.config_hash},
                {"tool_version", meta.tool_version},
                {"mds_distance", "jsd"},
                {"corpus_tokens", vocab.total_count()}}},
              {"default_lambda", default_lambda},
              {"R", top_r},
              {"topics", std::move(topics)},
              {"vocab", std::move(vocab_json)},
              {"topic_terms", std::move(topic_terms)}};
}

std::string validate_vis_payload(const json& p) {
  try {
    if (p.at("schema_version").get<int>() != kVisSchemaVersion) return "unsupported schema_version";
    const auto& topics = p.at("topics");
    if (!topics.is_array() || topics.empty()) return "topics must be a non-empty array";
    double total = 0.0;
    for (const auto& t : topics) {
      const double x = t.at("x").get<double>();
      const double y = t.at("y").get<double>();
      const double w = t.at("weight").get<double>();
      if (!std::isfinite(x) || !std::isfinite(y)) return "non-finite coordinate";
      if (!(w >= 0.0)) return "negative weight";
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) return "weights do not sum to 1";
    const auto R = p.at("R").get<std::size_t>();
    const auto& lists = p.at("topic_terms");
    if (lists.size() != topics.size()) return "topic_terms length differs from topics";
    for (const auto& l : lists) {
      if (l.at("terms").size() != R) return "inconsistent R across topics";
    }
    const double lambda = p.at("default_lambda").get<double>();
    if (!(lambda >= 0.0 && lambda <= 1.0)) return "default_lambda outside [0, 1]";
    p.at("metadata").at("K");
    p.at("vocab");
  } catch (const json::exception& e) {
    return std::string("missing or mistyped field: ") + e.what();
  }
  return {};
}

}  // namespace topiclens
