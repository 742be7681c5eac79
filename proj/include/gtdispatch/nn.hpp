#pragma once

// Small fully connected networks with hand-written reverse-mode gradients.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gtd::nn {

enum class Activation { kTanh, kRelu };
enum class OutputHead { kLinear, kSoftmax, kGaussian };

std::string to_string(Activation a);
std::string to_string(OutputHead h);
Activation parse_activation(const std::string& name);
OutputHead parse_output_head(const std::string& name);

struct NetworkSpec {
  std::size_t input_dim = 6;
  std::vector<std::size_t> hidden_layers{64, 64};
  Activation activation = Activation::kTanh;
  std::size_t output_dim = 1;
  OutputHead output_head = OutputHead::kLinear;

  // Length of the network output vector. Gaussian heads emit the mean
  // followed by the log standard deviation for each action dimension.
  std::size_t output_size() const;
  std::size_t layer_count() const { return hidden_layers.size() + 1; }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

void validate(const NetworkSpec& spec);

// Offsets of one affine layer inside the flat parameter vector. Weights are
// stored column-major as an (out x in) matrix, followed by the bias.
struct LayerSlice {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

std::vector<LayerSlice> layer_map(const NetworkSpec& spec);
std::size_t parameter_count(const NetworkSpec& spec);
// Offset of the Gaussian log-std block; parameter_count() if absent.
std::size_t log_std_offset(const NetworkSpec& spec);

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct ParameterSet {
  Vector values;
};

// Scaled-uniform (Glorot) weights, zero biases. The last layer is scaled by
// `output_gain`; the Gaussian log-std starts at `initial_log_std`.
ParameterSet init_parameters(const NetworkSpec& spec, std::mt19937_64& rng,
                             double output_gain = 1.0, double initial_log_std = 0.0);

// Throws DomainError on dimension mismatch.
Vector forward(const NetworkSpec& spec, const ParameterSet& params, std::span<const double> input);
inline Vector forward(const NetworkSpec& spec, const ParameterSet& params, const Vector& input) {
  return forward(spec, params, std::span<const double>(input.data(), static_cast<std::size_t>(input.size())));
}

// Gradient of <output, output_gradient> with respect to the parameters.
Vector backward(const NetworkSpec& spec, const ParameterSet& params, std::span<const double> input,
                std::span<const double> output_gradient);
inline Vector backward(const NetworkSpec& spec, const ParameterSet& params, const Vector& input,
                       const Vector& output_gradient) {
  return backward(spec, params, std::span<const double>(input.data(), static_cast<std::size_t>(input.size())),
                  std::span<const double>(output_gradient.data(), static_cast<std::size_t>(output_gradient.size())));
}

// Batched evaluation; one sample per column.
struct ForwardCache {
  std::vector<Matrix> activations;  // input, then each hidden layer output
  Matrix pre_output;                // final affine output (logits / mean)
  Matrix output;                    // after the head
};

ForwardCache forward_batch(const NetworkSpec& spec, const ParameterSet& params, const Matrix& inputs);

// Sums the per-sample parameter gradients. `output_gradients` has the shape
// of cache.output.
Vector backward_batch(const NetworkSpec& spec, const ParameterSet& params, const ForwardCache& cache,
                      const Matrix& output_gradients);

// Same, but starting from gradients with respect to cache.pre_output (the
// logits or Gaussian mean). The log-std block of the result is left at zero.
Vector backward_pre_output(const NetworkSpec& spec, const ParameterSet& params, const ForwardCache& cache,
                           const Matrix& pre_output_gradients);

struct AdamHyper {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global-norm gradient clip; <= 0 disables.
  double max_grad_norm = 0.0;
};

struct AdamMoments {
  Vector first;
  Vector second;
  std::int64_t step = 0;

  static AdamMoments zeros(std::size_t n);
};

struct AdamResult {
  ParameterSet params;
  AdamMoments moments;
};

// Gradient-descent Adam step (minimises). Throws TrainingError if the
// gradient is not finite.
AdamResult adam_update(const ParameterSet& params, const Vector& gradient, const AdamMoments& moments,
                       const AdamHyper& hyper);
// In-place variant used by the training loops.
void adam_update_inplace(ParameterSet& params, const Vector& gradient, AdamMoments& moments,
                         const AdamHyper& hyper);

// Text checkpoint:
//   gtdispatch-mlp 1
//   input_dim <n>
//   hidden <w1> <w2> ...
//   activation tanh|relu
//   output_dim <n>
//   head linear|softmax|gaussian
//   params <count>
//   <one value per line, shortest round-trip decimal>
void write_checkpoint(std::ostream& out, const NetworkSpec& spec, const ParameterSet& params);
void read_checkpoint(std::istream& in, NetworkSpec& spec, ParameterSet& params);
void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec, const ParameterSet& params);
void load_checkpoint(const std::filesystem::path& path, NetworkSpec& spec, ParameterSet& params);

}  // namespace gtd::nn
