#include <algorithm>
#include <iterator>
#include <unordered_map>

#include "topiclens/kernels/cooccurrence.hpp"

namespace topiclens::kernels {

namespace {

std::int64_t intersection_size(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
  std::int64_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

CoDocCounts codoc_counts_omp(const DocTermMatrix& matrix, const std::vector<std::vector<TermId>>& term_lists) {
  // Postings only for the terms that appear in some list.
  std::unordered_map<TermId, std::vector<std::int32_t>> postings;
  for (const auto& terms : term_lists) {
    for (TermId t : terms) postings.try_emplace(t);
  }
  for (std::size_t d = 0; d < matrix.rows.size(); ++d) {
    for (const auto& e : matrix.rows[d]) {
      if (auto it = postings.find(e.term); it != postings.end()) it->second.push_back(static_cast<std::int32_t>(d));
    }
  }

  CoDocCounts out(term_lists.size());
  const auto n_lists = static_cast<std::int64_t>(term_lists.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t l = 0; l < n_lists; ++l) {
    const auto& terms = term_lists[static_cast<std::size_t>(l)];
    const std::size_t m = terms.size();
    Dense<std::int64_t> counts(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& pi = postings.at(terms[i]);
      counts(i, i) = static_cast<std::int64_t>(pi.size());
      for (std::size_t j = 0; j < i; ++j) {
        const auto n = intersection_size(pi, postings.at(terms[j]));
        counts(i, j) = n;
        counts(j, i) = n;
      }
    }
    out[static_cast<std::size_t>(l)] = std::move(counts);
  }
  return out;
}

}  // namespace topiclens::kernels
