#include <algorithm>

#include "topiclens/kernels/cooccurrence.hpp"

namespace topiclens::kernels {

CoDocCounts codoc_counts_serial(const DocTermMatrix& matrix, const std::vector<std::vector<TermId>>& term_lists) {
  CoDocCounts out;
  out.reserve(term_lists.size());
  std::vector<char> present;
  for (const auto& terms : term_lists) {
    const std::size_t m = terms.size();
    Dense<std::int64_t> counts(m, m);
    present.assign(m, 0);
    for (const auto& row : matrix.rows) {
      for (std::size_t i = 0; i < m; ++i) {
        const auto it = std::lower_bound(row.begin(), row.end(), terms[i],
                                         [](const BowEntry& e, TermId t) { return e.term < t; });
        present[i] = it != row.end() && it->term == terms[i];
      }
      for (std::size_t i = 0; i < m; ++i) {
        if (!present[i]) continue;
        for (std::size_t j = 0; j < m; ++j) {
          if (present[j]) ++counts(i, j);
        }
      }
    }
    out.push_back(std::move(counts));
  }
  return out;
}

}  // namespace topiclens::kernels
