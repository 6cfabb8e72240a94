#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trackforge/common.hpp"

namespace trackforge {

enum class Activation : std::uint8_t { kTanh = 0, kIdentity = 1 };

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out

  bool operator==(const DenseLayer&) const = default;
};

struct MlpParams {
  std::vector<DenseLayer> layers;
  // Applied after every layer except the last.
  Activation hidden = Activation::kTanh;
  double hidden_gain = 1.4142135623730951;
  double output_gain = 1.0;
  // Empty for value networks.
  std::vector<double> log_std;

  int input_size() const { return layers.empty() ? 0 : layers.front().in; }
  int output_size() const { return layers.empty() ? 0 : layers.back().out; }
  std::vector<int> layer_sizes() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  bool operator==(const MlpParams&) const = default;
};

// Gradient tensors congruent with an MlpParams.
struct GradientSet {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;
  std::vector<double> log_std;

  static GradientSet zeros_like(const MlpParams& params);
  void set_zero();
  void add_scaled(const GradientSet& other, double k);
  void scale(double k);
  double squared_norm() const;
};

struct ForwardCache {
  // activations[0] is the input, activations[k + 1] the output of layer k.
  std::vector<std::vector<double>> activations;
  const std::vector<double>& output() const { return activations.back(); }
};

// Orthogonal weights (Gram-Schmidt QR of a Gaussian matrix with the
// diagonal-sign correction) scaled by sqrt(2) on hidden layers and
// `output_gain` on the last one; zero biases. `action_dim` > 0 adds a
// log_std vector initialized to -0.5.
MlpParams init_mlp(const std::vector<int>& layer_sizes, double output_gain,
                   std::uint64_t seed, int action_dim = 0);

std::vector<double> forward(const MlpParams& params, std::span<const double> input);
void forward(const MlpParams& params, std::span<const double> input, ForwardCache& cache);

// Accumulates d(loss)/d(params) into grads given d(loss)/d(output).
void backward(const MlpParams& params, const ForwardCache& cache,
              std::span<const double> output_grad, GradientSet& grads);
GradientSet backward(const MlpParams& params, const ForwardCache& cache,
                     std::span<const double> output_grad);

struct GaussianSample {
  std::vector<double> action;
  double log_prob = 0.0;
};

GaussianSample gaussian_sample(std::span<const double> mean, std::span<const double> log_std,
                               Rng& rng);
double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> action);
double gaussian_entropy(std::span<const double> log_std);

struct LogProbEntropy {
  double log_prob = 0.0;
  double entropy = 0.0;
};
LogProbEntropy gaussian_log_prob_and_entropy(std::span<const double> mean,
                                             std::span<const double> log_std,
                                             std::span<const double> action);

struct AdamState {
  GradientSet m;
  GradientSet v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const MlpParams& params);
};

struct AdamReport {
  double grad_norm = 0.0;  // before clipping
  bool clipped = false;
};

// Clips the global L2 norm of grads to max_grad_norm (no clipping when
// max_grad_norm <= 0), then applies one bias-corrected Adam step. Throws
// kNonFinite naming the offending tensor and leaves params and state
// untouched if any gradient is not finite.
AdamReport adam_update(MlpParams& params, const GradientSet& grads, AdamState& state,
                       double lr, double max_grad_norm);

std::string tensor_name(std::size_t layer, bool bias);

}  // namespace trackforge
