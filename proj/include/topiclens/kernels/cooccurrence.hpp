#pragma once

#include <cstdint>
#include <vector>

#include "topiclens/bow.hpp"
#include "topiclens/matrix.hpp"

namespace topiclens::kernels {

// For each term list, an M x M table whose (i, j) entry counts documents that
// contain both term i and term j; the diagonal holds document frequencies.
using CoDocCounts = std::vector<Dense<std::int64_t>>;

// Reference: one pass over documents per term list.
CoDocCounts codoc_counts_serial(const DocTermMatrix& matrix, const std::vector<std::vector<TermId>>& term_lists);

// Inverted postings, sorted-list intersection, term lists in parallel.
CoDocCounts codoc_counts_omp(const DocTermMatrix& matrix, const std::vector<std::vector<TermId>>& term_lists);

}  // namespace topiclens::kernels
