#include "topiclens/kernels/jsd.hpp"

#include <algorithm>
#include <cmath>

namespace topiclens::kernels {

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  double kl_p = 0.0;
  double kl_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) kl_p += p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) kl_q += q[i] * std::log2(q[i] / m);
  }
  return std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, 1.0);
}

DenseMatrix jsd_matrix_serial(const DenseMatrix& rows) {
  const std::size_t n = rows.rows();
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = jensen_shannon(rows.row(i), rows.row(j));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

DenseMatrix jsd_matrix_omp(const DenseMatrix& rows) {
  const std::size_t n = rows.rows();
  DenseMatrix out(n, n);
  const auto pairs = static_cast<std::int64_t>(n * (n - (n > 0 ? 1 : 0)) / 2);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t idx = 0; idx < pairs; ++idx) {
    // Unrank idx into (i, j), i < j, row-major over the upper triangle.
    auto rem = static_cast<std::size_t>(idx);
    std::size_t i = 0;
    while (rem >= n - 1 - i) {
      rem -= n - 1 - i;
      ++i;
    }
    const std::size_t j = i + 1 + rem;
    const double v = jensen_shannon(rows.row(i), rows.row(j));
    out(i, j) = v;
    out(j, i) = v;
  }
  return out;
}

}  // namespace topiclens::kernels
