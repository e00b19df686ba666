#pragma once

#include <span>

#include "topiclens/matrix.hpp"

namespace topiclens::kernels {

// Jensen-Shannon divergence in bits.
double jensen_shannon(std::span<const double> p, std::span<const double> q);

DenseMatrix jsd_matrix_serial(const DenseMatrix& rows);
DenseMatrix jsd_matrix_omp(const DenseMatrix& rows);

}  // namespace topiclens::kernels
