#include "trackforge/common.hpp"

namespace trackforge {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kGenerationFailure: return "generation-failure";
    case ErrorCode::kPlacementFailure: return "placement-failure";
    case ErrorCode::kMalformedFile: return "malformed-file";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kInvariantViolation: return "invariant-violation";
    case ErrorCode::kDegenerateSegment: return "degenerate-segment";
    case ErrorCode::kOutOfCorridor: return "out-of-corridor";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kEpisodeDone: return "episode-done";
    case ErrorCode::kResetRequired: return "reset-required";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  double w = std::fmod(a + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= std::numbers::pi;
  // fmod maps +pi to -pi; keep the half-open interval (-pi, pi].
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// The std distributions are implementation-defined; these keep the sampled
// streams identical across standard libraries.
double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

int uniform_int(Rng& rng, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return lo + static_cast<int>(r % span);
}

double standard_normal(Rng& rng) {
  // Box-Muller, one value per call so no hidden cached state.
  double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
  double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace trackforge
