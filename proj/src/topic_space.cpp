#include "topiclens/topic_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>

#include "topiclens/error.hpp"
#include "topiclens/kernels/jsd.hpp"

namespace topiclens {

namespace {

constexpr double kStochasticTolerance = 1e-6;

}  // namespace

DenseMatrix jsd_matrix(const DenseMatrix& phi) {
  for (std::size_t k = 0; k < phi.rows(); ++k) {
    double s = 0.0;
    for (double v : phi.row(k)) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw NumericError("jsd: row " + std::to_string(k) + " has a negative or non-finite entry");
      s += v;
    }
    if (std::abs(s - 1.0) > kStochasticTolerance) {
      throw NumericError("jsd: row " + std::to_string(k) + " sums to " + std::to_string(s) + ", not 1");
    }
  }
  return kernels::jsd_matrix_omp(phi);
}

MdsResult classical_mds(const DenseMatrix& dist, std::size_t dims) {
  const std::size_t n = dist.rows();
  if (n == 0 || dist.cols() != n) throw NumericError("mds: distance matrix must be square and non-empty");
  if (dims < 1 || dims > n) throw UsageError("mds: dims must lie in [1, n]");
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(dist(i, j)));
  }
  const double sym_tol = 1e-12 * std::max(scale, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(dist(i, i)) > sym_tol) throw NumericError("mds: non-zero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      if (dist(i, j) < 0.0) throw NumericError("mds: negative dissimilarity");
      if (std::abs(dist(i, j) - dist(j, i)) > sym_tol) throw NumericError("mds: distance matrix is not symmetric");
    }
  }

  // B = -1/2 J D^2 J via row, column and grand means of D^2.
  Eigen::MatrixXd sq(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dist(i, j) * dist(i, j);
  }
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const Eigen::RowVectorXd col_mean = sq.colwise().mean();
  const double grand = sq.mean();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
      b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + grand);
    }
  }
  b = 0.5 * (b + b.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) throw NumericError("mds: eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& vectors = solver.eigenvectors();

  MdsResult result;
  result.spectrum.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.spectrum[i] = values(static_cast<Eigen::Index>(n - 1 - i));
  const double top = result.spectrum.front();
  const double eps = 1e-12 * std::max(std::abs(top), std::abs(result.spectrum.back()));
  if (!(top > eps)) throw NumericError("mds: no metric structure (all eigenvalues <= 0)");
  for (double v : result.spectrum) {
    if (v < 0.0) result.negative_mass += -v;
  }

  result.coords = DenseMatrix(n, dims);
  result.eigenvalues.resize(dims);
  for (std::size_t c = 0; c < dims; ++c) {
    const auto col = static_cast<Eigen::Index>(n - 1 - c);
    const double lambda = std::max(values(col), 0.0);
    result.eigenvalues[c] = lambda;
    const double root = std::sqrt(lambda);
    Eigen::VectorXd v = vectors.col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    for (std::size_t i = 0; i < n; ++i) result.coords(i, c) = v(static_cast<Eigen::Index>(i)) * root;
  }
  return result;
}

TopicSpace build_topic_space(const DenseMatrix& phi, const std::vector<double>& weights) {
  if (weights.size() != phi.rows()) throw DataError("topic space: weights do not match topic count");
  TopicSpace space;
  space.jsd = jsd_matrix(phi);
  space.mds = classical_mds(space.jsd, std::min<std::size_t>(2, phi.rows()));
  space.weights = weights;
  return space;
}

std::vector<TermRanking> term_relevance(const DenseMatrix& phi, const Vocabulary& vocab, double lambda,
                                        std::size_t top_n, const std::vector<double>& topic_weights) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw UsageError("relevance: lambda must lie in [0, 1]");
  const std::size_t K = phi.rows();
  const std::size_t V = phi.cols();
  if (vocab.size() != V) throw DataError("relevance: vocabulary size does not match phi");
  if (topic_weights.size() != K) throw DataError("relevance: topic weights do not match phi");
  top_n = std::min(top_n, V);

  std::vector<double> pw(V);
  for (std::size_t w = 0; w < V; ++w) pw[w] = vocab.probability(w);

  // saliency(w) = p(w) * sum_k p(k|w) log(p(k|w) / p(k)),  p(k|w) ∝ phi_kw p(k)
  std::vector<double> saliency(V, 0.0);
  for (std::size_t w = 0; w < V; ++w) {
    double norm = 0.0;
    for (std::size_t k = 0; k < K; ++k) norm += phi(k, w) * topic_weights[k];
    if (norm <= 0.0) continue;
    double distinct = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double post = phi(k, w) * topic_weights[k] / norm;
      if (post > 0.0 && topic_weights[k] > 0.0) distinct += post * std::log(post / topic_weights[k]);
    }
    saliency[w] = pw[w] * distinct;
  }

  std::vector<TermRanking> out(K);
  std::vector<double> rel(V);
  std::vector<TermId> ids(V);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t w = 0; w < V; ++w) {
      const double p = phi(k, w);
      const double lift = pw[w] > 0.0 ? std::log(p / pw[w]) : 0.0;
      rel[w] = lambda * std::log(p) + (1.0 - lambda) * lift;
    }
    std::iota(ids.begin(), ids.end(), 0);
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(top_n), ids.end(), [&](TermId a, TermId b) {
      const auto ua = static_cast<std::size_t>(a);
      const auto ub = static_cast<std::size_t>(b);
      if (rel[ua] != rel[ub]) return rel[ua] > rel[ub];
      if (phi(k, ua) != phi(k, ub)) return phi(k, ua) > phi(k, ub);
      return vocab.term(ua) < vocab.term(ub);
    });
    out[k].topic = static_cast<int>(k);
    out[k].entries.reserve(top_n);
    for (std::size_t i = 0; i < top_n; ++i) {
      const auto w = static_cast<std::size_t>(ids[i]);
      out[k].entries.push_back({ids[i], phi(k, w), rel[w], saliency[w]});
    }
  }
  return out;
}

std::vector<GroupTopicProfile> aggregate_groups(const DenseMatrix& theta, const std::vector<std::string>& doc_ids,
                                                const std::map<std::string, DocMetadata>& metadata, GroupLevel level) {
  if (doc_ids.size() != theta.rows()) throw DataError("aggregate: theta rows and document ids differ in number");
  struct Acc {
    GroupTopicProfile profile;
    std::optional<int> year;
  };
  std::map<std::pair<std::string, std::string>, Acc> groups;
  const std::size_t K = theta.cols();
  for (std::size_t d = 0; d < theta.rows(); ++d) {
    auto it = metadata.find(doc_ids[d]);
    if (it == metadata.end()) throw DataError("aggregate: unknown document id \"" + doc_ids[d] + "\"");
    const auto& meta = it->second;
    const std::string album = level == GroupLevel::album ? meta.album : std::string();
    auto& acc = groups[{meta.band, album}];
    if (acc.profile.mean_theta.empty()) {
      acc.profile.band = meta.band;
      acc.profile.album = album;
      acc.profile.mean_theta.assign(K, 0.0);
    }
    if (meta.year && (!acc.year || *meta.year < *acc.year)) acc.year = meta.year;
    for (std::size_t k = 0; k < K; ++k) acc.profile.mean_theta[k] += theta(d, k);
    ++acc.profile.n_songs;
  }
  std::vector<Acc> ordered;
  ordered.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    for (double& v : acc.profile.mean_theta) v /= static_cast<double>(acc.profile.n_songs);
    ordered.push_back(std::move(acc));
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const Acc& a, const Acc& b) {
    if (a.profile.band != b.profile.band) return a.profile.band < b.profile.band;
    // Albums with a known year come first, in release order.
    if (a.year.has_value() != b.year.has_value()) return a.year.has_value();
    if (a.year && *a.year != *b.year) return *a.year < *b.year;
    return a.profile.album < b.profile.album;
  });
  std::vector<GroupTopicProfile> out;
  out.reserve(ordered.size());
  for (auto& a : ordered) out.push_back(std::move(a.profile));
  return out;
}

void write_heatmap(std::ostream& out, const std::vector<GroupTopicProfile>& profiles, GroupLevel level,
                   const std::string& provenance) {
  out << "# " << provenance << '\n';
  out << "band";
  if (level == GroupLevel::album) out << "\talbum";
  out << "\tn_songs";
  const std::size_t K = profiles.empty() ? 0 : profiles.front().mean_theta.size();
  for (std::size_t k = 0; k < K; ++k) out << "\ttopic_" << (k + 1);
  out << '\n';
  char buf[32];
  for (const auto& p : profiles) {
    out << p.band;
    if (level == GroupLevel::album) out << '\t' << p.album;
    out << '\t' << p.n_songs;
    for (double v : p.mean_theta) {
      std::snprintf(buf, sizeof buf, "%.6f", v);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

}  // namespace topiclens
