#include "trackforge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "trackforge/simd/kernels.hpp"

namespace trackforge {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

void check_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": expected size " +
                                                   std::to_string(a) + ", got " +
                                                   std::to_string(b));
  }
}

// Orthonormalizes the `count` vectors of length `dim` stored consecutively
// in v (count <= dim). Each vector is projected twice for stability.
void gram_schmidt(std::vector<double>& v, int count, int dim) {
  for (int i = 0; i < count; ++i) {
    double* vi = v.data() + static_cast<std::size_t>(i) * dim;
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < i; ++j) {
        const double* vj = v.data() + static_cast<std::size_t>(j) * dim;
        double p = 0.0;
        for (int k = 0; k < dim; ++k) p += vi[k] * vj[k];
        for (int k = 0; k < dim; ++k) vi[k] -= p * vj[k];
      }
    }
    double n = 0.0;
    for (int k = 0; k < dim; ++k) n += vi[k] * vi[k];
    n = std::sqrt(n);
    if (n < 1e-12) throw Error(ErrorCode::kInvariantViolation, "orthogonal init: rank deficiency");
    for (int k = 0; k < dim; ++k) vi[k] /= n;
  }
}

std::vector<double> orthogonal(int rows, int cols, double gain, Rng& rng) {
  const bool wide = rows <= cols;
  const int count = wide ? rows : cols;
  const int dim = wide ? cols : rows;
  std::vector<double> v(static_cast<std::size_t>(count) * dim);
  for (double& x : v) x = standard_normal(rng);
  gram_schmidt(v, count, dim);
  std::vector<double> w(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = wide ? v[static_cast<std::size_t>(r) * cols + c]
                            : v[static_cast<std::size_t>(c) * rows + r];
      w[static_cast<std::size_t>(r) * cols + c] = gain * x;
    }
  }
  return w;
}

bool finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::vector<int> MlpParams::layer_sizes() const {
  std::vector<int> out;
  if (layers.empty()) return out;
  out.push_back(layers.front().in);
  for (const auto& l : layers) out.push_back(l.out);
  return out;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = log_std.size();
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

bool MlpParams::all_finite() const {
  if (!finite(log_std)) return false;
  for (const auto& l : layers) {
    if (!finite(l.w) || !finite(l.b)) return false;
  }
  return true;
}

GradientSet GradientSet::zeros_like(const MlpParams& p) {
  GradientSet g;
  for (const auto& l : p.layers) {
    g.w.emplace_back(l.w.size(), 0.0);
    g.b.emplace_back(l.b.size(), 0.0);
  }
  g.log_std.assign(p.log_std.size(), 0.0);
  return g;
}

void GradientSet::set_zero() {
  for (auto& t : w) std::fill(t.begin(), t.end(), 0.0);
  for (auto& t : b) std::fill(t.begin(), t.end(), 0.0);
  std::fill(log_std.begin(), log_std.end(), 0.0);
}

void GradientSet::add_scaled(const GradientSet& o, double k) {
  auto add = [k](std::vector<double>& a, const std::vector<double>& b) {
    check_same(a.size(), b.size(), "gradient add");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += k * b[i];
  };
  check_same(w.size(), o.w.size(), "gradient add");
  for (std::size_t i = 0; i < w.size(); ++i) {
    add(w[i], o.w[i]);
    add(b[i], o.b[i]);
  }
  add(log_std, o.log_std);
}

void GradientSet::scale(double k) {
  for (auto& t : w) for (double& x : t) x *= k;
  for (auto& t : b) for (double& x : t) x *= k;
  for (double& x : log_std) x *= k;
}

double GradientSet::squared_norm() const {
  double acc = 0.0;
  for (const auto& t : w) for (double x : t) acc += x * x;
  for (const auto& t : b) for (double x : t) acc += x * x;
  for (double x : log_std) acc += x * x;
  return acc;
}

MlpParams init_mlp(const std::vector<int>& sizes, double output_gain, std::uint64_t seed,
                   int action_dim) {
  if (sizes.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "init_mlp: need at least two layer sizes");
  }
  for (int s : sizes) {
    if (s <= 0) throw Error(ErrorCode::kInvalidArgument, "init_mlp: layer sizes must be positive");
  }
  if (action_dim < 0 || (action_dim > 0 && action_dim != sizes.back())) {
    throw Error(ErrorCode::kInvalidArgument, "init_mlp: action_dim must match the output size");
  }
  Rng rng(derive_seed(seed, 0x1417));
  MlpParams p;
  p.output_gain = output_gain;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const bool last = k + 2 == sizes.size();
    DenseLayer l;
    l.in = sizes[k];
    l.out = sizes[k + 1];
    l.w = orthogonal(l.out, l.in, last ? output_gain : p.hidden_gain, rng);
    l.b.assign(l.out, 0.0);
    p.layers.push_back(std::move(l));
  }
  if (action_dim > 0) p.log_std.assign(action_dim, -0.5);
  return p;
}

void forward(const MlpParams& p, std::span<const double> input, ForwardCache& cache) {
  check_same(static_cast<std::size_t>(p.input_size()), input.size(), "forward input");
  const auto& k = simd::kernels();
  cache.activations.resize(p.layers.size() + 1);
  cache.activations[0].assign(input.begin(), input.end());
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const DenseLayer& l = p.layers[i];
    auto& y = cache.activations[i + 1];
    y.resize(l.out);
    k.gemv(l.w.data(), cache.activations[i].data(), l.b.data(), y.data(), l.out, l.in);
    if (i + 1 < p.layers.size() && p.hidden == Activation::kTanh) {
      for (double& v : y) v = std::tanh(v);
    }
  }
}

std::vector<double> forward(const MlpParams& p, std::span<const double> input) {
  ForwardCache cache;
  forward(p, input, cache);
  return cache.activations.back();
}

void backward(const MlpParams& p, const ForwardCache& cache, std::span<const double> output_grad,
              GradientSet& grads) {
  check_same(p.layers.size() + 1, cache.activations.size(), "backward cache");
  check_same(static_cast<std::size_t>(p.output_size()), output_grad.size(), "backward output");
  check_same(p.layers.size(), grads.w.size(), "backward gradients");
  const auto& k = simd::kernels();
  std::vector<double> g(output_grad.begin(), output_grad.end());
  std::vector<double> prev;
  for (std::size_t i = p.layers.size(); i-- > 0;) {
    const DenseLayer& l = p.layers[i];
    const auto& x = cache.activations[i];
    k.outer_accumulate(grads.w[i].data(), g.data(), x.data(), l.out, l.in);
    for (int r = 0; r < l.out; ++r) grads.b[i][r] += g[r];
    if (i == 0) break;
    prev.resize(l.in);
    k.gemv_transposed(l.w.data(), g.data(), prev.data(), l.out, l.in);
    if (p.hidden == Activation::kTanh) {
      for (int c = 0; c < l.in; ++c) prev[c] *= 1.0 - x[c] * x[c];
    }
    g.swap(prev);
  }
}

GradientSet backward(const MlpParams& p, const ForwardCache& cache,
                     std::span<const double> output_grad) {
  GradientSet g = GradientSet::zeros_like(p);
  backward(p, cache, output_grad, g);
  return g;
}

GaussianSample gaussian_sample(std::span<const double> mean, std::span<const double> log_std,
                               Rng& rng) {
  check_same(mean.size(), log_std.size(), "gaussian_sample");
  GaussianSample out;
  out.action.resize(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    out.action[i] = mean[i] + std::exp(log_std[i]) * standard_normal(rng);
  }
  out.log_prob = gaussian_log_prob(mean, log_std, out.action);
  return out;
}

double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> action) {
  check_same(mean.size(), log_std.size(), "gaussian_log_prob");
  check_same(mean.size(), action.size(), "gaussian_log_prob");
  double lp = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) h += ls + 0.5 + kHalfLog2Pi;
  return h;
}

LogProbEntropy gaussian_log_prob_and_entropy(std::span<const double> mean,
                                             std::span<const double> log_std,
                                             std::span<const double> action) {
  return {gaussian_log_prob(mean, log_std, action), gaussian_entropy(log_std)};
}

AdamState AdamState::for_params(const MlpParams& p) {
  AdamState s;
  s.m = GradientSet::zeros_like(p);
  s.v = GradientSet::zeros_like(p);
  return s;
}

std::string tensor_name(std::size_t layer, bool bias) {
  return "layer " + std::to_string(layer) + (bias ? " bias" : " weight");
}

AdamReport adam_update(MlpParams& p, const GradientSet& g, AdamState& s, double lr,
                       double max_grad_norm) {
  check_same(p.layers.size(), g.w.size(), "adam gradients");
  check_same(p.layers.size(), s.m.w.size(), "adam state");
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    check_same(p.layers[i].w.size(), g.w[i].size(), "adam gradients");
    check_same(p.layers[i].b.size(), g.b[i].size(), "adam gradients");
    if (!finite(g.w[i]) || !finite(g.b[i])) {
      throw Error(ErrorCode::kNonFinite,
                  "non-finite gradient in " + tensor_name(i, !finite(g.b[i])));
    }
  }
  check_same(p.log_std.size(), g.log_std.size(), "adam gradients");
  if (!finite(g.log_std)) throw Error(ErrorCode::kNonFinite, "non-finite gradient in log_std");

  AdamReport report;
  report.grad_norm = std::sqrt(g.squared_norm());
  double k = 1.0;
  if (max_grad_norm > 0.0 && report.grad_norm > max_grad_norm) {
    k = max_grad_norm / report.grad_norm;
    report.clipped = true;
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto apply = [&](std::vector<double>& param, const std::vector<double>& grad,
                   std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t j = 0; j < param.size(); ++j) {
      const double gj = grad[j] * k;
      m[j] = s.beta1 * m[j] + (1.0 - s.beta1) * gj;
      v[j] = s.beta2 * v[j] + (1.0 - s.beta2) * gj * gj;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      param[j] -= lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  };
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    apply(p.layers[i].w, g.w[i], s.m.w[i], s.v.w[i]);
    apply(p.layers[i].b, g.b[i], s.m.b[i], s.v.b[i]);
  }
  apply(p.log_std, g.log_std, s.m.log_std, s.v.log_std);
  return report;
}

}  // namespace trackforge
