#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topiclens/text.hpp"

namespace topiclens {

using TermId = std::int32_t;

class Vocabulary {
 public:
  struct Entry {
    std::string term;
    std::int64_t doc_frequency = 0;
    std::int64_t corpus_frequency = 0;
  };

  Vocabulary() = default;
  // Entries are taken in the given order; index = position.
  explicit Vocabulary(std::vector<Entry> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  const std::string& term(std::size_t i) const { return entries_[i].term; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::optional<TermId> find(std::string_view term) const;

  std::int64_t total_count() const noexcept { return total_count_; }
  // Corpus term probability p(w) = cf_w / sum(cf).
  double probability(std::size_t i) const;

  // FNV-1a over "term\n" for all terms in index order.
  std::uint64_t hash() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, TermId> index_;
  std::int64_t total_count_ = 0;
};

struct BowEntry {
  TermId term = 0;
  std::int32_t count = 0;

  bool operator==(const BowEntry&) const = default;
};

using SparseRow = std::vector<BowEntry>;

struct DocTermMatrix {
  std::vector<std::string> doc_ids;
  std::vector<SparseRow> rows;          // entries sorted by term, counts >= 1
  std::size_t vocab_size = 0;
  std::int64_t total_tokens = 0;        // N
  std::vector<std::size_t> empty_rows;  // documents with no in-vocabulary token

  std::size_t n_docs() const noexcept { return rows.size(); }
  std::int64_t row_length(std::size_t d) const;

  // Rows selected by index, preserving ids; totals and empty flags recomputed.
  DocTermMatrix subset(const std::vector<std::size_t>& indices) const;
};

constexpr std::int64_t kDefaultMinDf = 5;
constexpr double kDefaultMaxDfFraction = 0.5;

// Keeps terms with min_df <= df <= max_df_fraction * D, ordered by descending
// corpus frequency with lexicographic ties. Throws DataError if nothing survives.
Vocabulary build_vocabulary(const std::vector<TokenStream>& streams, std::int64_t min_df = kDefaultMinDf,
                            double max_df_fraction = kDefaultMaxDfFraction);

DocTermMatrix vectorize(const std::vector<TokenStream>& streams, const Vocabulary& vocab);

// Text matrix format:
//   '#' provenance lines
//   D V N
//   doc term count       (one line per nonzero, 0-based indices)
void write_matrix(std::ostream& out, const DocTermMatrix& m, std::string_view provenance = {});
// Document ids are not part of the matrix file; pass them when known.
DocTermMatrix read_matrix(std::istream& in, std::vector<std::string> doc_ids = {});

// Vocabulary TSV: header "term\tindex\tdf\tcf", then one row per term.
void write_vocabulary(std::ostream& out, const Vocabulary& vocab, std::string_view provenance = {});
Vocabulary read_vocabulary(std::istream& in);

}  // namespace topiclens
