#include "topiclens/kernels/rank_corr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace topiclens::kernels {

namespace {

struct Centered {
  std::vector<double> values;
  double sum_sq = 0.0;
};

Centered center_column(const DenseMatrix& m, std::size_t c) {
  const std::size_t n = m.rows();
  Centered out;
  out.values.resize(n);
  double mean = 0.0;
  for (std::size_t r = 0; r < n; ++r) mean += m(r, c);
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    out.values[r] = m(r, c) - mean;
    ss += out.values[r] * out.values[r];
  }
  out.sum_sq = ss;
  return out;
}

double correlation(const Centered& a, const Centered& b) {
  double s = 0.0;
  for (std::size_t r = 0; r < a.values.size(); ++r) s += a.values[r] * b.values[r];
  // NaN for a constant column; callers reject those before reaching here.
  // sqrt of the product so identical columns give exactly 1.
  return std::clamp(s / std::sqrt(a.sum_sq * b.sum_sq), -1.0, 1.0);
}

void check_shapes(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("column_correlations: row counts differ");
}

}  // namespace

DenseMatrix column_correlations_serial(const DenseMatrix& a, const DenseMatrix& b) {
  check_shapes(a, b);
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    const auto ca = center_column(a, i);
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) = correlation(ca, center_column(b, j));
  }
  return out;
}

DenseMatrix column_correlations_omp(const DenseMatrix& a, const DenseMatrix& b) {
  check_shapes(a, b);
  std::vector<Centered> ca(a.cols());
  std::vector<Centered> cb(b.cols());
  const auto na = static_cast<std::int64_t>(a.cols());
  const auto nb = static_cast<std::int64_t>(b.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < na; ++i) ca[static_cast<std::size_t>(i)] = center_column(a, static_cast<std::size_t>(i));
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < nb; ++j) cb[static_cast<std::size_t>(j)] = center_column(b, static_cast<std::size_t>(j));

  DenseMatrix out(a.cols(), b.cols());
  const std::int64_t cells = na * nb;
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < cells; ++c) {
    const auto i = static_cast<std::size_t>(c / nb);
    const auto j = static_cast<std::size_t>(c % nb);
    out(i, j) = correlation(ca[i], cb[j]);
  }
  return out;
}

}  // namespace topiclens::kernels
