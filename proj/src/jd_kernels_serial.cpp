#include "racr/jd.hpp"

namespace racr::jd::kernels {

double value_sum_serial(const Instance& inst, const Matrix& U, std::span<const ComponentIndex> sample) {
  double s = 0.0;
  for (ComponentIndex i : sample) s += component_value(inst.C[i], U);
  return s;
}

Matrix egrad_sum_serial(const Instance& inst, const Matrix& U, std::span<const ComponentIndex> sample) {
  Matrix s = Matrix::Zero(U.rows(), U.cols());
  for (ComponentIndex i : sample) s += component_egrad(inst.C[i], U);
  return s;
}

Matrix ehess_sum_serial(const Instance& inst, const Matrix& U, const Matrix& xi,
                        std::span<const ComponentIndex> sample) {
  Matrix s = Matrix::Zero(U.rows(), U.cols());
  for (ComponentIndex i : sample) s += component_ehess(inst.C[i], U, xi);
  return s;
}

}  // namespace racr::jd::kernels
