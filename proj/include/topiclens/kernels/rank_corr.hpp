#pragma once

#include <vector>

#include "topiclens/matrix.hpp"

namespace topiclens::kernels {

// Pearson correlation between every column of `a` and every column of `b`
// (same row count). Result is a.cols() x b.cols().
DenseMatrix column_correlations_serial(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix column_correlations_omp(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace topiclens::kernels
