#include "trackforge/simd/kernels.hpp"

#include "kernels_internal.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#define TRACKFORGE_HAVE_AVX2 1
#include <immintrin.h>
#else
#define TRACKFORGE_HAVE_AVX2 0
#endif

namespace trackforge::simd {

#if TRACKFORGE_HAVE_AVX2
namespace avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv(const double* w, const double* x, const double* bias, double* y,
          std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot(w + r * cols, x, cols) + (bias ? bias[r] : 0.0);
  }
}

void gemv_transposed(const double* w, const double* g, double* out,
                     std::size_t rows, std::size_t cols) {
  std::size_t c = 0;
  for (; c + 4 <= cols; c += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t r = 0; r < rows; ++r) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(g[r]),
                            _mm256_loadu_pd(w + r * cols + c), acc);
    }
    _mm256_storeu_pd(out + c, acc);
  }
  for (; c < cols; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += g[r] * w[r * cols + c];
    out[c] = acc;
  }
}

void outer_accumulate(double* grad, const double* g, const double* x,
                      std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const __m256d gr = _mm256_set1_pd(g[r]);
    double* row = grad + r * cols;
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_loadu_pd(row + c);
      acc = _mm256_fmadd_pd(gr, _mm256_loadu_pd(x + c), acc);
      _mm256_storeu_pd(row + c, acc);
    }
    for (; c < cols; ++c) row[c] += g[r] * x[c];
  }
}

// No FMA here: each lane performs the same mul/sub/div sequence as the
// scalar reference, so hits are bit-identical.
double ray_segments_min(double ox, double oy, double dx, double dy,
                        const SegmentSoA& segs, double max_t) {
  const __m256d vox = _mm256_set1_pd(ox);
  const __m256d voy = _mm256_set1_pd(oy);
  const __m256d vdx = _mm256_set1_pd(dx);
  const __m256d vdy = _mm256_set1_pd(dy);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d best = _mm256_set1_pd(max_t);
  std::size_t i = 0;
  for (; i + 4 <= segs.size; i += 4) {
    const __m256d ex = _mm256_loadu_pd(segs.ex + i);
    const __m256d ey = _mm256_loadu_pd(segs.ey + i);
    const __m256d qx = _mm256_sub_pd(_mm256_loadu_pd(segs.ax + i), vox);
    const __m256d qy = _mm256_sub_pd(_mm256_loadu_pd(segs.ay + i), voy);
    const __m256d denom =
        _mm256_sub_pd(_mm256_mul_pd(vdx, ey), _mm256_mul_pd(vdy, ex));
    const __m256d tn =
        _mm256_sub_pd(_mm256_mul_pd(qx, ey), _mm256_mul_pd(qy, ex));
    const __m256d wn =
        _mm256_sub_pd(_mm256_mul_pd(qx, vdy), _mm256_mul_pd(qy, vdx));
    const __m256d t = _mm256_div_pd(tn, denom);
    const __m256d w = _mm256_div_pd(wn, denom);
    // Ordered comparisons reject the NaN lanes produced by denom == 0.
    __m256d ok = _mm256_cmp_pd(denom, zero, _CMP_NEQ_OQ);
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(t, zero, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(w, zero, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(w, one, _CMP_LE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(t, best, _CMP_LT_OQ));
    best = _mm256_blendv_pd(best, t, ok);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double out = lanes[0];
  for (int k = 1; k < 4; ++k) out = lanes[k] < out ? lanes[k] : out;
  for (; i < segs.size; ++i) {
    out = ray_segment_hit(ox, oy, dx, dy, segs.ax[i], segs.ay[i], segs.ex[i],
                          segs.ey[i], out);
  }
  return out;
}

}  // namespace
}  // namespace avx2

const KernelTable* avx2_kernels() {
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable table{
      Isa::kAvx2,           avx2::dot,
      avx2::gemv,           avx2::gemv_transposed,
      avx2::outer_accumulate, avx2::ray_segments_min,
  };
  return supported ? &table : nullptr;
}
#else
const KernelTable* avx2_kernels() { return nullptr; }
#endif

}  // namespace trackforge::simd
