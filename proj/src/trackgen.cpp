#include "trackforge/trackgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "trackforge/frenet.hpp"
#include "trackforge/geometry.hpp"

namespace trackforge {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kDenseSamplesPerSpan = 64;
constexpr int kPlacementAttempts = 200;
constexpr double kLateralMargin = 0.02;
constexpr double kLongitudinalMargin = 0.5;
constexpr int kEdgeSamples = 8;

void fail_config(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, "trackgen." + field + ": " + why);
}

// Second derivatives of the periodic cubic spline through y at unit knot
// spacing: M[k-1] + 4 M[k] + M[k+1] = 6 (y[k+1] - 2 y[k] + y[k-1]).
std::vector<double> periodic_spline_moments(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> a(n * n, 0.0);
  std::vector<double> rhs(n);
  for (std::size_t k = 0; k < n; ++k) {
    a[k * n + k] += 4.0;
    a[k * n + (k + n - 1) % n] += 1.0;
    a[k * n + (k + 1) % n] += 1.0;
    rhs[k] = 6.0 * (y[(k + 1) % n] - 2.0 * y[k] + y[(k + n - 1) % n]);
  }
  // Strictly diagonally dominant, so elimination without pivoting is stable.
  for (std::size_t col = 0; col < n; ++col) {
    const double piv = a[col * n + col];
    for (std::size_t row = col + 1; row < n; ++row) {
      const double f = a[row * n + col] / piv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[row * n + c] -= f * a[col * n + c];
      rhs[row] -= f * rhs[col];
    }
  }
  std::vector<double> m(n);
  for (std::size_t row = n; row-- > 0;) {
    double acc = rhs[row];
    for (std::size_t c = row + 1; c < n; ++c) acc -= a[row * n + c] * m[c];
    m[row] = acc / a[row * n + row];
  }
  return m;
}

struct PeriodicSpline {
  std::vector<double> x, y, mx, my;

  Vec2 eval(double t) const {
    const std::size_t n = x.size();
    double span = std::floor(t);
    double tau = t - span;
    std::size_t k = static_cast<std::size_t>(
                        static_cast<long long>(span) % static_cast<long long>(n) + n) %
                    n;
    const std::size_t k1 = (k + 1) % n;
    const double om = 1.0 - tau;
    const double c0 = (om * om * om - om) / 6.0;
    const double c1 = (tau * tau * tau - tau) / 6.0;
    return {om * x[k] + tau * x[k1] + c0 * mx[k] + c1 * mx[k1],
            om * y[k] + tau * y[k1] + c0 * my[k] + c1 * my[k1]};
  }
};

TrackMap build_candidate(Rng& rng, std::uint64_t seed, const TrackGenConfig& cfg) {
  const int n = cfg.control_point_count;
  PeriodicSpline sp;
  sp.x.resize(n);
  sp.y.resize(n);
  for (int k = 0; k < n; ++k) {
    const double r = cfg.radius_mean + uniform(rng, -cfg.radius_jitter, cfg.radius_jitter);
    const double a = kTwoPi * k / n;
    sp.x[k] = r * std::cos(a);
    sp.y[k] = r * std::sin(a);
  }
  sp.mx = periodic_spline_moments(sp.x);
  sp.my = periodic_spline_moments(sp.y);

  const int dense = n * kDenseSamplesPerSpan;
  std::vector<double> dense_s(dense + 1, 0.0);
  Vec2 prev = sp.eval(0.0);
  for (int j = 1; j <= dense; ++j) {
    const Vec2 p = sp.eval(static_cast<double>(j) / kDenseSamplesPerSpan);
    dense_s[j] = dense_s[j - 1] + norm(p - prev);
    prev = p;
  }
  const double length = dense_s.back();
  const int count = std::max(
      16, static_cast<int>(std::lround(length / cfg.resample_spacing)));
  std::vector<Vec2> pts(count);
  for (int k = 0; k < count; ++k) {
    const double target = length * k / count;
    auto it = std::upper_bound(dense_s.begin(), dense_s.end(), target);
    const int j = std::clamp(static_cast<int>(it - dense_s.begin()) - 1, 0, dense - 1);
    const double frac = (target - dense_s[j]) / (dense_s[j + 1] - dense_s[j]);
    pts[k] = sp.eval((j + frac) / kDenseSamplesPerSpan);
  }
  if (uniform(rng, 0.0, 1.0) < cfg.reverse_probability) {
    std::reverse(pts.begin() + 1, pts.end());
  }

  // Smooth low-frequency width profile from a few random harmonics.
  double coef[3], phase[3], coef_sum = 0.0;
  for (int h = 0; h < 3; ++h) {
    coef[h] = uniform(rng, 0.0, 1.0) / (h + 1);
    phase[h] = uniform(rng, 0.0, kTwoPi);
    coef_sum += coef[h];
  }
  const double lo = cfg.width_range[0];
  const double hi = cfg.width_range[1];
  std::vector<double> hw(count);
  for (int k = 0; k < count; ++k) {
    const double a = kTwoPi * k / count;
    double f = 0.0;
    for (int h = 0; h < 3; ++h) f += coef[h] * std::sin((h + 1) * a + phase[h]);
    f = coef_sum > 0.0 ? f / coef_sum : 0.0;
    hw[k] = hi == lo ? lo : std::clamp(lo + (hi - lo) * (0.5 + 0.5 * f), lo, hi);
  }
  return make_track(std::move(pts), std::move(hw), seed, cfg.resample_spacing);
}

struct Extent {
  double s_lo, s_hi, d_lo, d_hi;
};

// Frenet bounding box of a polygon, with s unwrapped around `s_ref`.
Extent frenet_extent(const CenterlineIndex& idx, const std::vector<Vec2>& poly,
                     double s_ref) {
  const double L = idx.total_length();
  Extent e{1e300, -1e300, 1e300, -1e300};
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < kEdgeSamples; ++k) {
      const Vec2 p = poly[i] + (poly[(i + 1) % n] - poly[i]) *
                                   (static_cast<double>(k) / kEdgeSamples);
      const FrenetPoint f = idx.to_frenet(p);
      double s = f.s;
      if (s - s_ref > 0.5 * L) s -= L;
      if (s_ref - s > 0.5 * L) s += L;
      e.s_lo = std::min(e.s_lo, s);
      e.s_hi = std::max(e.s_hi, s);
      e.d_lo = std::min(e.d_lo, f.d);
      e.d_hi = std::max(e.d_hi, f.d);
    }
  }
  return e;
}

double min_half_width_over(const TrackMap& t, double s_lo, double s_hi) {
  double m = std::min(t.half_width_at(s_lo), t.half_width_at(s_hi));
  const double L = t.total_length;
  for (std::size_t i = 0; i + 1 < t.cum_s.size(); ++i) {
    for (double shift : {-L, 0.0, L}) {
      const double s = t.cum_s[i] + shift;
      if (s >= s_lo && s <= s_hi) m = std::min(m, t.half_width[i]);
    }
  }
  return m;
}

bool s_overlap(const Extent& a, const Extent& b, double L, double margin) {
  for (double shift : {-L, 0.0, L}) {
    if (a.s_lo - margin <= b.s_hi + shift && b.s_lo + shift <= a.s_hi + margin) {
      return true;
    }
  }
  return false;
}

// Arc-length distance from the spawn point (s = 0 = L) to an s interval.
double spawn_distance(const Extent& e, double L) {
  double best = 1e300;
  for (double k : {-L, 0.0, L, 2.0 * L}) {
    if (e.s_lo <= k && k <= e.s_hi) return 0.0;
    best = std::min({best, std::abs(e.s_lo - k), std::abs(e.s_hi - k)});
  }
  return best;
}

double widest_gap(double half_width, std::vector<std::pair<double, double>> blocked) {
  std::sort(blocked.begin(), blocked.end());
  double cursor = -half_width;
  double best = 0.0;
  for (auto [lo, hi] : blocked) {
    lo = std::max(lo - kLateralMargin, -half_width);
    hi = std::min(hi + kLateralMargin, half_width);
    if (lo > cursor) best = std::max(best, lo - cursor);
    cursor = std::max(cursor, hi);
  }
  return std::max(best, half_width - cursor);
}

}  // namespace

void TrackGenConfig::validate() const {
  if (control_point_count < 4) fail_config("control_point_count", "must be >= 4");
  if (!(radius_mean > 0.0)) fail_config("radius_mean", "must be > 0");
  if (!(radius_jitter >= 0.0) || radius_jitter >= radius_mean) {
    fail_config("radius_jitter", "must be in [0, radius_mean)");
  }
  if (!(width_range[0] > 0.0) || width_range[1] < width_range[0]) {
    fail_config("width_range", "must satisfy 0 < min <= max");
  }
  if (!(resample_spacing > 0.0)) fail_config("resample_spacing", "must be > 0");
  if (obstacle_count_range[0] < 0 || obstacle_count_range[1] < obstacle_count_range[0]) {
    fail_config("obstacle_count_range", "must satisfy 0 <= min <= max");
  }
  if (!(obstacle_size_range[0] > 0.0) ||
      obstacle_size_range[1] < obstacle_size_range[0]) {
    fail_config("obstacle_size_range", "must satisfy 0 < min <= max");
  }
  if (!(min_passable_width > 0.0)) fail_config("min_passable_width", "must be > 0");
  if (!(spawn_clearance >= 0.0)) fail_config("spawn_clearance", "must be >= 0");
  if (!(reverse_probability >= 0.0 && reverse_probability <= 1.0)) {
    fail_config("reverse_probability", "must be in [0, 1]");
  }
  if (max_retries < 1) fail_config("max_retries", "must be >= 1");
}

TrackMap generate_track(std::uint64_t seed, const TrackGenConfig& config) {
  config.validate();
  ValidationLimits limits;
  limits.min_half_width = config.width_range[0];
  std::string last_failure;
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    TrackMap t = build_candidate(rng, seed, config);
    const ValidationReport report = validate_track(t, limits);
    if (report.ok()) return t;
    last_failure = report.failures.front().check;
  }
  throw Error(ErrorCode::kGenerationFailure,
              "no valid track for seed " + std::to_string(seed) + " after " +
                  std::to_string(config.max_retries) +
                  " attempts (last failure: " + last_failure + ")");
}

std::vector<Vec2> obstacle_shape(int kind, double size, double aspect,
                                 double rotation, Vec2 center) {
  std::vector<Vec2> local;
  switch (kind) {
    case 0: {  // equilateral triangle, height = size
      const double r = 2.0 * size / 3.0;
      for (int k = 0; k < 3; ++k) local.push_back(unit_from_angle(kTwoPi * k / 3) * r);
      break;
    }
    case 1: {  // rectangle, short side = size
      const double hl = 0.5 * size * aspect;
      const double hs = 0.5 * size;
      local = {{-hl, -hs}, {hl, -hs}, {hl, hs}, {-hl, hs}};
      break;
    }
    default: {  // decagon, inradius = size / 2
      const double r = 0.5 * size / std::cos(std::numbers::pi / 10);
      for (int k = 0; k < 10; ++k) local.push_back(unit_from_angle(kTwoPi * k / 10) * r);
      break;
    }
  }
  const double c = std::cos(rotation), s = std::sin(rotation);
  std::vector<Vec2> out;
  out.reserve(local.size());
  for (const Vec2 p : local) {
    out.push_back(center + Vec2{c * p.x - s * p.y, s * p.x + c * p.y});
  }
  return out;
}

TrackMap place_obstacles(const TrackMap& track, std::uint64_t seed,
                         const TrackGenConfig& config) {
  config.validate();
  if (!track.obstacles.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "place_obstacles: track already has obstacles");
  }
  Rng rng(derive_seed(seed, 0x0b57ac1eull));
  const int count =
      uniform_int(rng, config.obstacle_count_range[0], config.obstacle_count_range[1]);
  TrackMap out = track;
  if (count == 0) return out;

  const CenterlineIndex idx(track);
  const double L = track.total_length;
  std::vector<Extent> placed;
  for (int k = 0; k < count; ++k) {
    bool ok = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !ok; ++attempt) {
      const double s = uniform(rng, 0.0, L);
      const double size =
          uniform(rng, config.obstacle_size_range[0], config.obstacle_size_range[1]);
      const int kind = uniform_int(rng, 0, 2);
      const double aspect = uniform(rng, 1.0, 1.5);
      const double rotation = uniform(rng, 0.0, kTwoPi);
      const double d_unit = uniform(rng, -1.0, 1.0);

      const double hw = track.half_width_at(s);
      const double radius = kind == 1 ? 0.5 * size * std::hypot(aspect, 1.0)
                                      : (kind == 0 ? 2.0 * size / 3.0
                                                   : 0.5 * size / std::cos(std::numbers::pi / 10));
      const double d_span = hw - radius;
      if (d_span <= 0.0) continue;
      const double d = d_unit * d_span;
      std::vector<Vec2> poly = obstacle_shape(kind, size, aspect, rotation,
                                              idx.from_frenet(s, d));
      const Extent e = frenet_extent(idx, poly, s);

      if (spawn_distance(e, L) < config.spawn_clearance) continue;
      double hw_min = min_half_width_over(track, e.s_lo, e.s_hi);
      if (e.d_lo < -hw_min || e.d_hi > hw_min) continue;

      std::vector<std::pair<double, double>> blocked{{e.d_lo, e.d_hi}};
      bool collides = false;
      for (std::size_t j = 0; j < placed.size(); ++j) {
        if (!s_overlap(e, placed[j], L, kLongitudinalMargin)) continue;
        if (convex_polygons_overlap(poly, out.obstacles[j].vertices)) collides = true;
        blocked.emplace_back(placed[j].d_lo, placed[j].d_hi);
        hw_min = std::min(hw_min,
                          min_half_width_over(track, placed[j].s_lo, placed[j].s_hi));
      }
      if (collides) continue;
      if (widest_gap(hw_min, blocked) < config.min_passable_width) continue;

      out.obstacles.push_back({std::move(poly), idx.wrap_s(s), d});
      placed.push_back(e);
      ok = true;
    }
    if (!ok) {
      throw Error(ErrorCode::kPlacementFailure,
                  "could not place obstacle " + std::to_string(k) + " of " +
                      std::to_string(count) + " after " +
                      std::to_string(kPlacementAttempts) + " attempts");
    }
  }
  return out;
}

TrackMap generate_track_with_obstacles(std::uint64_t seed,
                                       const TrackGenConfig& config) {
  const TrackMap base = generate_track(seed, config);
  return place_obstacles(base, derive_seed(seed, 0x0b5ull), config);
}

}  // namespace trackforge
