#include "spinal/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace spinal::simd {

namespace {

double forward_scalar(std::span<const double, kCells> w, std::span<const double, kWidth> x,
                      ForwardScratch& out) {
  out.clamped = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < kWidth; ++i) {
    double exponent = 0.0;
    for (std::size_t j = 0; j < kWidth; ++j) {
      if (j == i) continue;
      const double arg = w[i * kWidth + j] * x[j];
      if (std::abs(arg) > kExpClamp) ++out.clamped;
      exponent += std::clamp(arg, -kExpClamp, kExpClamp);
    }
    out.factors[i] = std::exp(exponent);
    out.terms[i] = w[i * kWidth + i] * x[i] * out.factors[i];
    total += out.terms[i];
  }
  return total;
}

void gradient_scalar(std::span<const double, kCells> w, std::span<const double, kWidth> x,
                     const ForwardScratch& fwd, std::span<double, kCells> grad) {
  for (std::size_t i = 0; i < kWidth; ++i) {
    for (std::size_t j = 0; j < kWidth; ++j) {
      double g;
      if (j == i) {
        g = x[i] * fwd.factors[i];
      } else if (std::abs(w[i * kWidth + j] * x[j]) > kExpClamp) {
        g = 0.0;
      } else {
        g = fwd.terms[i] * x[j];
      }
      grad[i * kWidth + j] = g;
    }
  }
}

void update_scalar(std::span<double, kCells> w, std::span<const double, kCells> grad, double step,
                   double decay) {
  for (std::size_t c = 0; c < kCells; ++c) {
    w[c] = w[c] + step * grad[c] - decay * w[c];
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &forward_scalar, &gradient_scalar, &update_scalar};
  return table;
}

}  // namespace spinal::simd
