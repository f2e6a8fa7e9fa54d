#include "racr/jd.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <vector>

namespace racr::jd::kernels {

bool openmp_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

std::ptrdiff_t block_count(std::size_t m) { return static_cast<std::ptrdiff_t>((m + kBlock - 1) / kBlock); }

// Each block is accumulated sequentially into its own slot, then the slots are
// added in block order.
template <class Term>
Matrix blocked_matrix_sum(std::span<const ComponentIndex> sample, Eigen::Index rows, Eigen::Index cols, Term term) {
  const std::ptrdiff_t blocks = block_count(sample.size());
  std::vector<Matrix> partial(static_cast<std::size_t>(blocks), Matrix::Zero(rows, cols));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(sample.size(), lo + kBlock);
    Matrix& acc = partial[static_cast<std::size_t>(b)];
    for (std::size_t t = lo; t < hi; ++t) acc += term(sample[t]);
  }
  Matrix total = Matrix::Zero(rows, cols);
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace

double value_sum_omp(const Instance& inst, const Matrix& U, std::span<const ComponentIndex> sample) {
  const std::ptrdiff_t blocks = block_count(sample.size());
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(sample.size(), lo + kBlock);
    double acc = 0.0;
    for (std::size_t t = lo; t < hi; ++t) acc += component_value(inst.C[sample[t]], U);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

Matrix egrad_sum_omp(const Instance& inst, const Matrix& U, std::span<const ComponentIndex> sample) {
  return blocked_matrix_sum(sample, U.rows(), U.cols(),
                            [&](ComponentIndex i) { return component_egrad(inst.C[i], U); });
}

Matrix ehess_sum_omp(const Instance& inst, const Matrix& U, const Matrix& xi, std::span<const ComponentIndex> sample) {
  return blocked_matrix_sum(sample, U.rows(), U.cols(),
                            [&](ComponentIndex i) { return component_ehess(inst.C[i], U, xi); });
}

}  // namespace racr::jd::kernels
