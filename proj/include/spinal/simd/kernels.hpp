#pragma once

// Inner loops of the multiplicative network, in a scalar reference form and
// an AVX2 form. The variant is chosen once at runtime; both operate on 8-wide
// inputs and row-major 8x8 weight matrices stored as 64 contiguous doubles.
//
// Agreement contract between variants:
//   gradient, update  bit-identical for identical inputs
//   forward           same clamp count; each exponent sum agrees to a few
//                     ulps (the AVX2 path reduces rows pairwise), so factors
//                     agree to ~eps * sum|W_ij x_j| relative

#include <cstddef>
#include <span>
#include <string_view>

namespace spinal::simd {

inline constexpr std::size_t kWidth = 8;
inline constexpr std::size_t kCells = kWidth * kWidth;

// Exponent arguments W_ij * x_j are clamped to +-kExpClamp before use.
inline constexpr double kExpClamp = 50.0;

struct ForwardScratch {
  alignas(32) double factors[kWidth];  // exp(sum_{j != i} clamp(W_ij x_j))
  alignas(32) double terms[kWidth];    // W_ii x_i factors[i]
  int clamped = 0;                     // exponent arguments hit by the clamp
};

using ForwardFn = double (*)(std::span<const double, kCells> w,
                             std::span<const double, kWidth> x, ForwardScratch& out);

// grad(i,i) = x_i * factors[i]; grad(i,j) = terms[i] * x_j, or 0 where the
// argument W_ij x_j was clamped.
using GradientFn = void (*)(std::span<const double, kCells> w, std::span<const double, kWidth> x,
                            const ForwardScratch& fwd, std::span<double, kCells> grad);

// w <- w + step * grad - decay * w
using UpdateFn = void (*)(std::span<double, kCells> w, std::span<const double, kCells> grad,
                          double step, double decay);

struct KernelTable {
  std::string_view name;
  ForwardFn forward;
  GradientFn gradient;
  UpdateFn update;
};

const KernelTable& scalar_kernels();

/// nullptr when the build has no AVX2 variant or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// The table used by the library. Defaults to the widest variant the CPU
/// supports; SPINAL_KERNELS=scalar|avx2 in the environment overrides it.
const KernelTable& active_kernels();

/// Overrides the active table ("scalar", "avx2", or "auto"). Returns false
/// when the requested variant is unavailable; the selection is unchanged.
bool select_kernels(std::string_view name);

}  // namespace spinal::simd
