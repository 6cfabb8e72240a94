#pragma once

#include <cstddef>

// Data-parallel inner loops used by the network and the lidar. Every kernel
// has a scalar reference implementation; vector variants are selected once at
// startup from the CPU's capabilities and can be forced with the
// TRACKFORGE_SIMD environment variable ("scalar", "avx2", "auto").

namespace trackforge::simd {

enum class Isa { kScalar, kAvx2 };

// Structure-of-arrays view of line segments: segment i runs from
// (ax[i], ay[i]) to (ax[i] + ex[i], ay[i] + ey[i]).
struct SegmentSoA {
  const double* ax = nullptr;
  const double* ay = nullptr;
  const double* ex = nullptr;
  const double* ey = nullptr;
  std::size_t size = 0;
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y = W x + bias, W row-major rows x cols. bias may be null.
  void (*gemv)(const double* w, const double* x, const double* bias, double* y,
               std::size_t rows, std::size_t cols);
  // out = W^T g, out has cols entries.
  void (*gemv_transposed)(const double* w, const double* g, double* out,
                          std::size_t rows, std::size_t cols);
  // grad += g x^T.
  void (*outer_accumulate)(double* grad, const double* g, const double* x,
                           std::size_t rows, std::size_t cols);
  // Smallest ray parameter t in [0, max_t] at which the ray o + t*d hits a
  // segment (closed on both ends); max_t if there is no hit. Parallel
  // segments never register a hit.
  double (*ray_segments_min)(double ox, double oy, double dx, double dy,
                             const SegmentSoA& segs, double max_t);
};

const KernelTable& scalar_kernels();
// Null when the running CPU (or build) lacks AVX2+FMA.
const KernelTable* avx2_kernels();

const KernelTable& kernels();
Isa active_isa();
const char* isa_name(Isa isa);
bool isa_available(Isa isa);
// Overrides the runtime choice; returns false if the ISA is unavailable.
bool force_isa(Isa isa);

}  // namespace trackforge::simd
