#include "trackforge/simd/kernels.hpp"

#include "kernels_internal.hpp"

namespace trackforge::simd {
namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
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
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += gr * row[c];
  }
}

void outer_accumulate(double* grad, const double* g, const double* x,
                      std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    double* row = grad + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
  }
}

double ray_segments_min(double ox, double oy, double dx, double dy,
                        const SegmentSoA& segs, double max_t) {
  double best = max_t;
  for (std::size_t i = 0; i < segs.size; ++i) {
    best = ray_segment_hit(ox, oy, dx, dy, segs.ax[i], segs.ay[i], segs.ex[i],
                           segs.ey[i], best);
  }
  return best;
}

}  // namespace scalar

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      Isa::kScalar,       scalar::dot,
      scalar::gemv,       scalar::gemv_transposed,
      scalar::outer_accumulate, scalar::ray_segments_min,
  };
  return table;
}

}  // namespace trackforge::simd
