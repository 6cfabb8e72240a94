#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace trackforge {

enum class ErrorCode {
  kInvalidArgument,
  kGenerationFailure,
  kPlacementFailure,
  kMalformedFile,
  kVersionMismatch,
  kInvariantViolation,
  kDegenerateSegment,
  kOutOfCorridor,
  kDimensionMismatch,
  kNonFinite,
  kEpisodeDone,
  kResetRequired,
  kIo,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double k, Vec2 v) { return v * k; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// Left (counter-clockwise) perpendicular.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  bool operator==(const Pose2&) const = default;
};

// Wraps to (-pi, pi].
double wrap_angle(double a);

using Rng = std::mt19937_64;

// splitmix64 finalizer over (seed, stream); used to fork independent RNG
// streams from one master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive
double standard_normal(Rng& rng);

}  // namespace trackforge
