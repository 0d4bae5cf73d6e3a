// Compiled with -mavx2. Only reachable through avx2_kernels() after the
// dispatcher has confirmed CPU support.

#include "spinal/simd/kernels.hpp"

#include <immintrin.h>

#include <bit>
#include <cmath>
#include <cstdint>

namespace spinal::simd {

namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double reduce_add(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// All-ones in every lane except lane `skip`.
inline __m256d lane_keep_mask(std::size_t skip) {
  alignas(32) std::int64_t bits[4] = {-1, -1, -1, -1};
  if (skip < 4) bits[skip] = 0;
  return _mm256_castsi256_pd(_mm256_load_si256(reinterpret_cast<const __m256i*>(bits)));
}

double forward_avx2(std::span<const double, kCells> w, std::span<const double, kWidth> x,
                    ForwardScratch& out) {
  const __m256d x_lo = _mm256_loadu_pd(x.data());
  const __m256d x_hi = _mm256_loadu_pd(x.data() + 4);
  const __m256d hi_bound = _mm256_set1_pd(kExpClamp);
  const __m256d lo_bound = _mm256_set1_pd(-kExpClamp);
  const __m256d keep_all = lane_keep_mask(4);

  out.clamped = 0;
  for (std::size_t i = 0; i < kWidth; ++i) {
    const double* row = w.data() + i * kWidth;
    __m256d a_lo = _mm256_mul_pd(_mm256_loadu_pd(row), x_lo);
    __m256d a_hi = _mm256_mul_pd(_mm256_loadu_pd(row + 4), x_hi);

    const __m256d keep_lo = i < 4 ? lane_keep_mask(i) : keep_all;
    const __m256d keep_hi = i < 4 ? keep_all : lane_keep_mask(i - 4);

    const __m256d over_lo = _mm256_and_pd(_mm256_cmp_pd(abs_pd(a_lo), hi_bound, _CMP_GT_OQ), keep_lo);
    const __m256d over_hi = _mm256_and_pd(_mm256_cmp_pd(abs_pd(a_hi), hi_bound, _CMP_GT_OQ), keep_hi);
    out.clamped += std::popcount(static_cast<unsigned>(_mm256_movemask_pd(over_lo))) +
                   std::popcount(static_cast<unsigned>(_mm256_movemask_pd(over_hi)));

    a_lo = _mm256_and_pd(_mm256_min_pd(_mm256_max_pd(a_lo, lo_bound), hi_bound), keep_lo);
    a_hi = _mm256_and_pd(_mm256_min_pd(_mm256_max_pd(a_hi, lo_bound), hi_bound), keep_hi);
    out.factors[i] = std::exp(reduce_add(_mm256_add_pd(a_lo, a_hi)));
  }

  const __m256d t_lo = _mm256_mul_pd(
      _mm256_mul_pd(_mm256_setr_pd(w[0], w[9], w[18], w[27]), x_lo), _mm256_load_pd(out.factors));
  const __m256d t_hi = _mm256_mul_pd(
      _mm256_mul_pd(_mm256_setr_pd(w[36], w[45], w[54], w[63]), x_hi),
      _mm256_load_pd(out.factors + 4));
  _mm256_store_pd(out.terms, t_lo);
  _mm256_store_pd(out.terms + 4, t_hi);

  double total = 0.0;
  for (std::size_t i = 0; i < kWidth; ++i) total += out.terms[i];
  return total;
}

void gradient_avx2(std::span<const double, kCells> w, std::span<const double, kWidth> x,
                   const ForwardScratch& fwd, std::span<double, kCells> grad) {
  const __m256d x_lo = _mm256_loadu_pd(x.data());
  const __m256d x_hi = _mm256_loadu_pd(x.data() + 4);
  const __m256d bound = _mm256_set1_pd(kExpClamp);
  for (std::size_t i = 0; i < kWidth; ++i) {
    const double* row = w.data() + i * kWidth;
    const __m256d over_lo =
        _mm256_cmp_pd(abs_pd(_mm256_mul_pd(_mm256_loadu_pd(row), x_lo)), bound, _CMP_GT_OQ);
    const __m256d over_hi =
        _mm256_cmp_pd(abs_pd(_mm256_mul_pd(_mm256_loadu_pd(row + 4), x_hi)), bound, _CMP_GT_OQ);
    const __m256d term = _mm256_set1_pd(fwd.terms[i]);
    double* out = grad.data() + i * kWidth;
    _mm256_storeu_pd(out, _mm256_andnot_pd(over_lo, _mm256_mul_pd(term, x_lo)));
    _mm256_storeu_pd(out + 4, _mm256_andnot_pd(over_hi, _mm256_mul_pd(term, x_hi)));
    out[i] = x[i] * fwd.factors[i];
  }
}

void update_avx2(std::span<double, kCells> w, std::span<const double, kCells> grad, double step,
                 double decay) {
  const __m256d s = _mm256_set1_pd(step);
  const __m256d d = _mm256_set1_pd(decay);
  for (std::size_t c = 0; c < kCells; c += 4) {
    const __m256d wv = _mm256_loadu_pd(w.data() + c);
    const __m256d gv = _mm256_loadu_pd(grad.data() + c);
    const __m256d next = _mm256_sub_pd(_mm256_add_pd(wv, _mm256_mul_pd(s, gv)), _mm256_mul_pd(d, wv));
    _mm256_storeu_pd(w.data() + c, next);
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", &forward_avx2, &gradient_avx2, &update_avx2};
  return table;
}

}  // namespace spinal::simd
