#pragma once

#include <cstddef>

namespace trackforge::simd {

// Shared by the scalar reference and the vector tails so both evaluate the
// exact same sequence of IEEE operations.
inline double ray_segment_hit(double ox, double oy, double dx, double dy,
                              double ax, double ay, double ex, double ey,
                              double best) {
  const double qx = ax - ox;
  const double qy = ay - oy;
  const double denom = dx * ey - dy * ex;
  if (denom == 0.0) return best;
  const double t = (qx * ey - qy * ex) / denom;
  const double w = (qx * dy - qy * dx) / denom;
  if (t >= 0.0 && w >= 0.0 && w <= 1.0 && t < best) return t;
  return best;
}

}  // namespace trackforge::simd
