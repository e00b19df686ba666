#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "topiclens/bow.hpp"
#include "topiclens/corpus.hpp"
#include "topiclens/lda.hpp"
#include "topiclens/matrix.hpp"

namespace topiclens {

// Symmetric K x K Jensen-Shannon divergence (base 2) between rows of `phi`.
// Throws NumericError if a row is not a probability vector.
DenseMatrix jsd_matrix(const DenseMatrix& phi);

struct MdsResult {
  DenseMatrix coords;                // n x dims, columns centered
  std::vector<double> eigenvalues;   // top `dims`, after clamping at 0
  std::vector<double> spectrum;      // all eigenvalues of B, descending, unclamped
  double negative_mass = 0.0;        // sum of |negative eigenvalues|
};

// Torgerson scaling: B = -1/2 J D^2 J, coords = V sqrt(lambda). Each column's
// largest-magnitude entry is made positive.
MdsResult classical_mds(const DenseMatrix& dist, std::size_t dims = 2);

struct TopicSpace {
  DenseMatrix jsd;
  MdsResult mds;
  std::vector<double> weights;
};

TopicSpace build_topic_space(const DenseMatrix& phi, const std::vector<double>& weights);

struct TermScore {
  TermId term = 0;
  double phi = 0.0;
  double relevance = 0.0;
  double saliency = 0.0;
};

struct TermRanking {
  int topic = 0;
  std::vector<TermScore> entries;
};

constexpr double kDefaultLambda = 0.6;

// relevance(w, k | lambda) = lambda log phi_kw + (1 - lambda) log(phi_kw / p(w)),
// saliency(w) = p(w) sum_k p(k|w) log(p(k|w) / p(k)). Ranked by relevance, ties by
// phi then term string. `topic_weights` supplies p(k) for saliency.
std::vector<TermRanking> term_relevance(const DenseMatrix& phi, const Vocabulary& vocab, double lambda,
                                        std::size_t top_n, const std::vector<double>& topic_weights);

enum class GroupLevel { band, album };

struct GroupTopicProfile {
  std::string band;
  std::string album;  // empty at band level
  std::vector<double> mean_theta;
  std::size_t n_songs = 0;
};

struct DocMetadata {
  std::string band;
  std::string album;
  std::optional<int> year;
};

// Mean theta per group. Output ordered by band, then album year when known,
// then album name. Throws DataError for a theta row without metadata.
std::vector<GroupTopicProfile> aggregate_groups(const DenseMatrix& theta, const std::vector<std::string>& doc_ids,
                                                const std::map<std::string, DocMetadata>& metadata,
                                                GroupLevel level);

// Heatmap TSV: one row per group, one column per topic.
void write_heatmap(std::ostream& out, const std::vector<GroupTopicProfile>& profiles, GroupLevel level,
                   const std::string& provenance);

}  // namespace topiclens
