#include "topiclens/bow.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "topiclens/error.hpp"
#include "topiclens/rng.hpp"

namespace topiclens {

Vocabulary::Vocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].term, static_cast<TermId>(i)).second) {
      throw DataError("vocabulary: duplicate term \"" + entries_[i].term + "\"");
    }
    total_count_ += entries_[i].corpus_frequency;
  }
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::probability(std::size_t i) const {
  if (total_count_ == 0) return 0.0;
  return static_cast<double>(entries_[i].corpus_frequency) / static_cast<double>(total_count_);
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = fnv1a("");
  for (const auto& e : entries_) {
    h = fnv1a(e.term, h);
    h = fnv1a("\n", h);
  }
  return h;
}

std::int64_t DocTermMatrix::row_length(std::size_t d) const {
  std::int64_t n = 0;
  for (const auto& e : rows[d]) n += e.count;
  return n;
}

DocTermMatrix DocTermMatrix::subset(const std::vector<std::size_t>& indices) const {
  DocTermMatrix out;
  out.vocab_size = vocab_size;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= rows.size()) throw DataError("matrix subset: row index out of range");
    out.rows.push_back(rows[i]);
    if (!doc_ids.empty()) out.doc_ids.push_back(doc_ids[i]);
    const auto len = row_length(i);
    if (len == 0) out.empty_rows.push_back(out.rows.size() - 1);
    out.total_tokens += len;
  }
  return out;
}

namespace {

struct TermCounts {
  std::int64_t df = 0;
  std::int64_t cf = 0;
};

using CountMap = std::unordered_map<std::string, TermCounts>;

void count_stream(const TokenStream& ts, CountMap& counts) {
  std::unordered_set<std::string_view> seen;
  for (const auto& t : ts.tokens) {
    auto& c = counts[t];
    c.cf += 1;
    if (seen.insert(t).second) c.df += 1;
  }
}

}  // namespace

Vocabulary build_vocabulary(const std::vector<TokenStream>& streams, std::int64_t min_df, double max_df_fraction) {
  if (min_df < 1) throw UsageError("build_vocabulary: min_df must be >= 1");
  if (!(max_df_fraction > 0.0 && max_df_fraction <= 1.0)) {
    throw UsageError("build_vocabulary: max_df_fraction must lie in (0, 1]");
  }
  const auto n = static_cast<std::int64_t>(streams.size());

  // Per-thread maps merged at the end; the merged counts do not depend on the split.
  CountMap counts;
#pragma omp parallel
  {
    CountMap local;
#pragma omp for schedule(static)
    for (std::int64_t d = 0; d < n; ++d) count_stream(streams[static_cast<std::size_t>(d)], local);
#pragma omp critical(topiclens_vocab_merge)
    for (auto& [term, c] : local) {
      auto& g = counts[term];
      g.df += c.df;
      g.cf += c.cf;
    }
  }

  const double max_df = max_df_fraction * static_cast<double>(n);
  std::vector<Vocabulary::Entry> kept;
  for (auto& [term, c] : counts) {
    if (c.df >= min_df && static_cast<double>(c.df) <= max_df) kept.push_back({term, c.df, c.cf});
  }
  if (kept.empty()) {
    throw DataError("vocabulary is empty after document-frequency filtering (min_df=" + std::to_string(min_df) +
                    ", max_df_fraction=" + std::to_string(max_df_fraction) + "); try a lower min_df");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.corpus_frequency != b.corpus_frequency) return a.corpus_frequency > b.corpus_frequency;
    return a.term < b.term;
  });
  return Vocabulary(std::move(kept));
}

DocTermMatrix vectorize(const std::vector<TokenStream>& streams, const Vocabulary& vocab) {
  DocTermMatrix m;
  m.vocab_size = vocab.size();
  m.rows.resize(streams.size());
  m.doc_ids.resize(streams.size());
  const auto n = static_cast<std::int64_t>(streams.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto d = static_cast<std::size_t>(i);
    std::unordered_map<TermId, std::int32_t> row;
    for (const auto& t : streams[d].tokens) {
      if (auto id = vocab.find(t)) ++row[*id];
    }
    SparseRow sparse;
    sparse.reserve(row.size());
    for (auto [term, count] : row) sparse.push_back({term, count});
    std::sort(sparse.begin(), sparse.end(), [](const BowEntry& a, const BowEntry& b) { return a.term < b.term; });
    m.rows[d] = std::move(sparse);
    m.doc_ids[d] = streams[d].doc_id;
  }
  for (std::size_t d = 0; d < m.rows.size(); ++d) {
    const auto len = m.row_length(d);
    if (len == 0) m.empty_rows.push_back(d);
    m.total_tokens += len;
  }
  return m;
}

void write_matrix(std::ostream& out, const DocTermMatrix& m, std::string_view provenance) {
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << m.n_docs() << ' ' << m.vocab_size << ' ' << m.total_tokens << '\n';
  for (std::size_t d = 0; d < m.rows.size(); ++d) {
    for (const auto& e : m.rows[d]) out << d << ' ' << e.term << ' ' << e.count << '\n';
  }
}

DocTermMatrix read_matrix(std::istream& in, std::vector<std::string> doc_ids) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (!line.empty() && line.front() != '#') return true;
    }
    return false;
  };
  if (!next_line()) throw DataError("matrix file: missing header");
  std::size_t n_docs = 0, n_terms = 0;
  std::int64_t n_tokens = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> n_docs >> n_terms >> n_tokens)) throw DataError("matrix file: malformed header");
  }
  DocTermMatrix m;
  m.vocab_size = n_terms;
  m.rows.resize(n_docs);
  std::int64_t sum = 0;
  while (next_line()) {
    std::istringstream ls(line);
    std::size_t d = 0;
    std::int64_t t = 0, c = 0;
    if (!(ls >> d >> t >> c)) throw DataError("matrix file: malformed triple \"" + line + "\"");
    if (d >= n_docs || t < 0 || static_cast<std::size_t>(t) >= n_terms || c < 1) {
      throw DataError("matrix file: triple out of range \"" + line + "\"");
    }
    m.rows[d].push_back({static_cast<TermId>(t), static_cast<std::int32_t>(c)});
    sum += c;
  }
  if (sum != n_tokens) throw DataError("matrix file: counts sum to " + std::to_string(sum) + ", header says " +
                                       std::to_string(n_tokens));
  for (std::size_t d = 0; d < n_docs; ++d) {
    auto& row = m.rows[d];
    std::sort(row.begin(), row.end(), [](const BowEntry& a, const BowEntry& b) { return a.term < b.term; });
    if (row.empty()) m.empty_rows.push_back(d);
  }
  m.total_tokens = n_tokens;
  if (!doc_ids.empty()) {
    if (doc_ids.size() != n_docs) throw DataError("matrix file: document id count does not match D");
    m.doc_ids = std::move(doc_ids);
  }
  return m;
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab, std::string_view provenance) {
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "term\tindex\tdf\tcf\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto& e = vocab[i];
    out << e.term << '\t' << i << '\t' << e.doc_frequency << '\t' << e.corpus_frequency << '\n';
  }
}

Vocabulary read_vocabulary(std::istream& in) {
  std::string line;
  std::vector<Vocabulary::Entry> entries;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "term\tindex\tdf\tcf") throw DataError("vocabulary TSV: unexpected header \"" + line + "\"");
      header = true;
      continue;
    }
    std::istringstream ls(line);
    Vocabulary::Entry e;
    std::size_t index = 0;
    if (!std::getline(ls, e.term, '\t') || !(ls >> index >> e.doc_frequency >> e.corpus_frequency)) {
      throw DataError("vocabulary TSV: malformed row \"" + line + "\"");
    }
    if (index != entries.size()) throw DataError("vocabulary TSV: indices are not dense at \"" + e.term + "\"");
    entries.push_back(std::move(e));
  }
  return Vocabulary(std::move(entries));
}

}  // namespace topiclens
