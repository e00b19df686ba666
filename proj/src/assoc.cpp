#include "topiclens/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <boost/math/special_functions/beta.hpp>
#include <json.hpp>

#include "topiclens/error.hpp"
#include "topiclens/kernels/rank_corr.hpp"
#include "topiclens/rng.hpp"

namespace topiclens {

namespace {

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      field.push_back(c);
    } else if (c == ',' && !quoted) {
      out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(trim(field));
  return out;
}

bool has_two_distinct(std::span<const double> v) {
  return std::any_of(v.begin(), v.end(), [&](double x) { return x != v.front(); });
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

FeatureTable::FeatureTable(std::vector<std::string> names, std::vector<std::string> ids, DenseMatrix values)
    : names_(std::move(names)), ids_(std::move(ids)), values_(std::move(values)) {
  if (values_.rows() != ids_.size() || values_.cols() != names_.size()) throw DataError("feature table: shape mismatch");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) throw DataError("feature table: duplicate id \"" + ids_[i] + "\"");
  }
  for (double v : values_.data()) {
    if (!std::isfinite(v)) throw DataError("feature table: non-finite value");
  }
}

std::optional<std::size_t> FeatureTable::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureTable read_feature_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    header = split_csv(line);
  }
  if (header.size() < 2 || header.front() != "id") throw DataError("feature CSV: header must be \"id,<feature>,...\"");
  std::vector<std::string> names(header.begin() + 1, header.end());
  std::vector<std::string> ids;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw DataError("feature CSV line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    ids.push_back(fields[0]);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      char* end = nullptr;
      const double v = std::strtod(fields[f].c_str(), &end);
      if (fields[f].empty() || end != fields[f].c_str() + fields[f].size() || !std::isfinite(v)) {
        throw DataError("feature CSV line " + std::to_string(line_no) + ": \"" + fields[f] + "\" is not a finite number");
      }
      values.push_back(v);
    }
  }
  DenseMatrix m(ids.size(), names.size());
  m.data() = std::move(values);
  return FeatureTable(std::move(names), std::move(ids), std::move(m));
}

FeatureTable load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature table " + path.string());
  return read_feature_csv(in);
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = mean_rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw NumericError("spearman: vectors differ in length");
  if (x.size() < 3) throw NumericError("spearman: need at least 3 observations");
  if (!has_two_distinct(x) || !has_two_distinct(y)) throw NumericError("spearman: undefined correlation (constant vector)");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

PValue spearman_p(double rho, std::size_t n) {
  if (n < 4) throw NumericError("spearman_p: need n >= 4");
  if (!(std::abs(rho) <= 1.0)) throw NumericError("spearman_p: rho outside [-1, 1]");
  if (std::abs(rho) == 1.0) return {0.0, true};
  const double df = static_cast<double>(n - 2);
  const double t2 = rho * rho * df / (1.0 - rho * rho);
  // Two-sided Student-t tail: P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
  const double p = boost::math::ibeta(0.5 * df, 0.5, df / (df + t2));
  return {std::clamp(p, 0.0, 1.0), false};
}

double spearman_permutation_p(std::span<const double> x, std::span<const double> y, std::size_t permutations,
                              std::uint64_t seed) {
  if (permutations == 0) throw UsageError("permutation test: need at least one permutation");
  const double observed = std::abs(spearman(x, y));
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  SplitMix64 rng(seed);
  std::size_t extreme = 0;
  // Rounding slack so permutations that tie the observed statistic count as extreme.
  const double threshold = observed - 1e-12;
  for (std::size_t p = 0; p < permutations; ++p) {
    for (std::size_t i = ry.size() - 1; i > 0; --i) std::swap(ry[i], ry[rng.below(i + 1)]);
    if (std::abs(pearson(rx, ry)) >= threshold) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + permutations);
}

CorrelationReport bonferroni(std::vector<CorrelationEntry> entries, double alpha) {
  if (entries.empty()) throw UsageError("bonferroni: no tests");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("bonferroni: alpha must lie in (0, 1)");
  CorrelationReport r;
  r.alpha = alpha;
  r.m_tests = entries.size();
  r.corrected_alpha = alpha / static_cast<double>(r.m_tests);
  for (auto& e : entries) {
    e.significant_raw = e.p_value < alpha;
    e.significant_corrected = e.significant_raw && e.p_value < r.corrected_alpha;
  }
  r.entries = std::move(entries);
  return r;
}

CorrelationReport correlate(const DenseMatrix& theta, const std::vector<std::string>& doc_ids,
                            const FeatureTable& features, const CorrelateOptions& options,
                            const std::vector<std::string>* explicit_ids) {
  if (doc_ids.size() != theta.rows()) throw DataError("correlate: theta rows and document ids differ in number");
  std::unordered_map<std::string, std::size_t> theta_index;
  for (std::size_t d = 0; d < doc_ids.size(); ++d) theta_index.emplace(doc_ids[d], d);

  std::vector<std::string> ids;
  if (explicit_ids) {
    std::vector<std::string> missing;
    for (const auto& id : *explicit_ids) {
      if (!theta_index.contains(id) || !features.find(id)) missing.push_back(id);
    }
    if (!missing.empty()) {
      std::string list;
      for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
      throw DataError("correlate: ids missing from theta or features: " + list);
    }
    ids = *explicit_ids;
  } else {
    for (const auto& id : features.ids()) {
      if (theta_index.contains(id)) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    if (options.sample_size > 0) {
      if (options.sample_size > ids.size()) {
        throw DataError("correlate: sample of " + std::to_string(options.sample_size) + " requested but only " +
                        std::to_string(ids.size()) + " ids are shared by theta and features");
      }
      SplitMix64 rng(options.seed);
      for (std::size_t i = 0; i < options.sample_size; ++i) std::swap(ids[i], ids[i + rng.below(ids.size() - i)]);
      ids.resize(options.sample_size);
      std::sort(ids.begin(), ids.end());
    }
  }
  const std::size_t n = ids.size();
  if (n < 4) throw DataError("correlate: need at least 4 documents shared by theta and features, found " + std::to_string(n));

  const std::size_t K = theta.cols();
  const std::size_t F = features.names().size();
  DenseMatrix topic_ranks(n, K);
  DenseMatrix feature_ranks(n, F);
  DenseMatrix topic_values(n, K);
  DenseMatrix feature_values(n, F);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = theta_index.at(ids[i]);
    const auto r = *features.find(ids[i]);
    for (std::size_t k = 0; k < K; ++k) topic_values(i, k) = theta(d, k);
    for (std::size_t f = 0; f < F; ++f) feature_values(i, f) = features.values()(r, f);
  }
  auto rank_columns = [n](const DenseMatrix& values, DenseMatrix& ranks, auto&& label) {
    std::vector<double> col(n);
    for (std::size_t c = 0; c < values.cols(); ++c) {
      for (std::size_t i = 0; i < n; ++i) col[i] = values(i, c);
      if (!has_two_distinct(col)) throw NumericError("correlate: undefined correlation, " + label(c) + " is constant");
      const auto r = average_ranks(col);
      for (std::size_t i = 0; i < n; ++i) ranks(i, c) = r[i];
    }
  };
  rank_columns(topic_values, topic_ranks, [](std::size_t k) { return "topic " + std::to_string(k + 1); });
  rank_columns(feature_values, feature_ranks, [&](std::size_t f) { return "feature \"" + features.names()[f] + "\""; });

  const DenseMatrix rho = kernels::column_correlations_omp(topic_ranks, feature_ranks);

  std::vector<CorrelationEntry> entries;
  entries.reserve(K * F);
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t f = 0; f < F; ++f) {
      CorrelationEntry e;
      e.topic = static_cast<int>(k);
      e.feature = features.names()[f];
      e.rho = rho(k, f);
      if (options.permutations > 0) {
        for (std::size_t i = 0; i < n; ++i) {
          x[i] = topic_values(i, k);
          y[i] = feature_values(i, f);
        }
        e.p_value = spearman_permutation_p(x, y, options.permutations, combine_seed(options.seed, k * F + f));
      } else {
        const auto p = spearman_p(e.rho, n);
        e.p_value = p.p;
        e.p_exact = p.exact;
      }
      entries.push_back(std::move(e));
    }
  }
  auto report = bonferroni(std::move(entries), options.alpha);
  report.n = n;
  report.sample_ids = std::move(ids);
  report.sample_seed = options.seed;
  report.requested_sample = explicit_ids ? report.n : options.sample_size;
  report.p_method = options.permutations > 0 ? "permutation" : "t";
  return report;
}

namespace {

std::string fmt(double v) { return nlohmann::json(v).dump(); }

}  // namespace

void write_report_tsv(std::ostream& out, const CorrelationReport& r, const std::string& provenance) {
  out << "# " << provenance << '\n';
  out << "# n=" << r.n << " m_tests=" << r.m_tests << " alpha=" << fmt(r.alpha) << " corrected_alpha=" << fmt(r.corrected_alpha)
      << " p_method=" << r.p_method << " sample=" << r.requested_sample << " seed=" << r.sample_seed << '\n';
  out << "topic\tfeature\trho\tp_value\tsignificant_raw\tsignificant_corrected\n";
  for (const auto& e : r.entries) {
    out << (e.topic + 1) << '\t' << e.feature << '\t' << fmt(e.rho) << '\t' << fmt(e.p_value) << '\t'
        << (e.significant_raw ? 1 : 0) << '\t' << (e.significant_corrected ? 1 : 0) << '\n';
  }
}

void write_report_json(std::ostream& out, const CorrelationReport& r, const std::string& provenance) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"topic", e.topic + 1},
                       {"feature", e.feature},
                       {"rho", e.rho},
                       {"p_value", e.p_value},
                       {"p_exact", e.p_exact},
                       {"significant_raw", e.significant_raw},
                       {"significant_corrected", e.significant_corrected}});
  }
  nlohmann::json j = {{"provenance", provenance},
                      {"n", r.n},
                      {"m_tests", r.m_tests},
                      {"alpha", r.alpha},
                      {"corrected_alpha", r.corrected_alpha},
                      {"p_method", r.p_method},
                      {"sample", {{"requested", r.requested_sample}, {"seed", r.sample_seed}, {"ids", r.sample_ids}}},
                      {"entries", std::move(entries)}};
  out << j.dump(2) << '\n';
}

}  // namespace topiclens
