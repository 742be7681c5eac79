#include "gtdispatch/nn.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gtdispatch/errors.hpp"

namespace gtd::nn {

std::string to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "relu"; }

std::string to_string(OutputHead h) {
  switch (h) {
    case OutputHead::kLinear:
      return "linear";
    case OutputHead::kSoftmax:
      return "softmax";
    case OutputHead::kGaussian:
      return "gaussian";
  }
  return "linear";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + name + "'");
}

OutputHead parse_output_head(const std::string& name) {
  if (name == "linear") return OutputHead::kLinear;
  if (name == "softmax") return OutputHead::kSoftmax;
  if (name == "gaussian") return OutputHead::kGaussian;
  throw ConfigError("unknown output head '" + name + "'");
}

std::size_t NetworkSpec::output_size() const {
  return output_head == OutputHead::kGaussian ? 2 * output_dim : output_dim;
}

void validate(const NetworkSpec& spec) {
  if (spec.input_dim == 0 || spec.output_dim == 0) {
    throw ConfigError("network input and output dimensions must be positive");
  }
  for (const auto w : spec.hidden_layers) {
    if (w == 0) throw ConfigError("hidden layer widths must be positive");
  }
}

std::vector<LayerSlice> layer_map(const NetworkSpec& spec) {
  std::vector<LayerSlice> layers;
  std::size_t offset = 0;
  std::size_t in = spec.input_dim;
  auto add = [&](std::size_t out) {
    LayerSlice s;
    s.in = in;
    s.out = out;
    s.weight_offset = offset;
    s.bias_offset = offset + in * out;
    offset = s.bias_offset + out;
    layers.push_back(s);
    in = out;
  };
  for (const auto w : spec.hidden_layers) add(w);
  add(spec.output_dim);
  return layers;
}

std::size_t log_std_offset(const NetworkSpec& spec) {
  const auto layers = layer_map(spec);
  return layers.back().bias_offset + layers.back().out;
}

std::size_t parameter_count(const NetworkSpec& spec) {
  const std::size_t base = log_std_offset(spec);
  return spec.output_head == OutputHead::kGaussian ? base + spec.output_dim : base;
}

ParameterSet init_parameters(const NetworkSpec& spec, std::mt19937_64& rng, double output_gain,
                             double initial_log_std) {
  validate(spec);
  ParameterSet p;
  p.values = Vector::Zero(static_cast<Eigen::Index>(parameter_count(spec)));
  const auto layers = layer_map(spec);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& s = layers[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(s.in + s.out)) *
                         (l + 1 == layers.size() ? output_gain : 1.0);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t k = 0; k < s.in * s.out; ++k) {
      p.values[static_cast<Eigen::Index>(s.weight_offset + k)] = dist(rng);
    }
  }
  if (spec.output_head == OutputHead::kGaussian) {
    const auto off = static_cast<Eigen::Index>(log_std_offset(spec));
    p.values.segment(off, static_cast<Eigen::Index>(spec.output_dim)).setConstant(initial_log_std);
  }
  return p;
}

namespace {

using ConstMatrixMap = Eigen::Map<const Matrix>;

ConstMatrixMap weights(const ParameterSet& params, const LayerSlice& s) {
  return ConstMatrixMap(params.values.data() + s.weight_offset, static_cast<Eigen::Index>(s.out),
                        static_cast<Eigen::Index>(s.in));
}

Eigen::Map<const Vector> bias(const ParameterSet& params, const LayerSlice& s) {
  return Eigen::Map<const Vector>(params.values.data() + s.bias_offset,
                                  static_cast<Eigen::Index>(s.out));
}

void check_params(const NetworkSpec& spec, const ParameterSet& params) {
  if (static_cast<std::size_t>(params.values.size()) != parameter_count(spec)) {
    throw DomainError("parameter vector length " + std::to_string(params.values.size()) +
                      " does not match network spec (" + std::to_string(parameter_count(spec)) + ")");
  }
}

void apply_activation(Activation act, Matrix& m) {
  if (act == Activation::kTanh) {
    m = m.array().tanh().matrix();
  } else {
    m = m.cwiseMax(0.0);
  }
}

// Multiplies `delta` in place by the activation derivative expressed through
// the activation output.
void scale_by_derivative(Activation act, const Matrix& activated, Matrix& delta) {
  if (act == Activation::kTanh) {
    delta.array() *= 1.0 - activated.array().square();
  } else {
    delta.array() *= (activated.array() > 0.0).cast<double>();
  }
}

void softmax_columns(const Matrix& logits, Matrix& out) {
  out.resize(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double peak = logits.col(c).maxCoeff();
    out.col(c) = (logits.col(c).array() - peak).exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
}

void backprop(const NetworkSpec& spec, const ParameterSet& params, const std::vector<LayerSlice>& layers,
              const ForwardCache& cache, Matrix delta, Vector& grad) {
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& s = layers[l];
    const Matrix& prev = cache.activations[l];
    Eigen::Map<Matrix> gw(grad.data() + s.weight_offset, static_cast<Eigen::Index>(s.out),
                          static_cast<Eigen::Index>(s.in));
    gw.noalias() = delta * prev.transpose();
    grad.segment(static_cast<Eigen::Index>(s.bias_offset), static_cast<Eigen::Index>(s.out)) =
        delta.rowwise().sum();
    if (l > 0) {
      Matrix next = weights(params, s).transpose() * delta;
      scale_by_derivative(spec.activation, prev, next);
      delta = std::move(next);
    }
  }
}

}  // namespace

ForwardCache forward_batch(const NetworkSpec& spec, const ParameterSet& params, const Matrix& inputs) {
  check_params(spec, params);
  if (static_cast<std::size_t>(inputs.rows()) != spec.input_dim) {
    throw DomainError("input dimension " + std::to_string(inputs.rows()) + " does not match network input " +
                      std::to_string(spec.input_dim));
  }
  const auto layers = layer_map(spec);
  ForwardCache cache;
  cache.activations.reserve(layers.size());
  cache.activations.push_back(inputs);
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Matrix z = weights(params, layers[l]) * cache.activations.back();
    z.colwise() += bias(params, layers[l]);
    apply_activation(spec.activation, z);
    cache.activations.push_back(std::move(z));
  }
  cache.pre_output = weights(params, layers.back()) * cache.activations.back();
  cache.pre_output.colwise() += bias(params, layers.back());

  switch (spec.output_head) {
    case OutputHead::kLinear:
      cache.output = cache.pre_output;
      break;
    case OutputHead::kSoftmax:
      softmax_columns(cache.pre_output, cache.output);
      break;
    case OutputHead::kGaussian: {
      const auto d = static_cast<Eigen::Index>(spec.output_dim);
      cache.output.resize(2 * d, inputs.cols());
      cache.output.topRows(d) = cache.pre_output;
      const Vector log_std = params.values.segment(static_cast<Eigen::Index>(log_std_offset(spec)), d);
      cache.output.bottomRows(d) = log_std.replicate(1, inputs.cols());
      break;
    }
  }
  return cache;
}

Vector backward_batch(const NetworkSpec& spec, const ParameterSet& params, const ForwardCache& cache,
                      const Matrix& output_gradients) {
  check_params(spec, params);
  if (output_gradients.rows() != cache.output.rows() || output_gradients.cols() != cache.output.cols()) {
    throw DomainError("output gradient shape does not match forward output");
  }
  const auto layers = layer_map(spec);
  Vector grad = Vector::Zero(params.values.size());

  Matrix delta;
  switch (spec.output_head) {
    case OutputHead::kLinear:
      delta = output_gradients;
      break;
    case OutputHead::kSoftmax: {
      // d/dz of <softmax(z), g> = p * (g - <p, g>)
      const Eigen::RowVectorXd dots = (cache.output.array() * output_gradients.array()).colwise().sum();
      delta = (cache.output.array() * (output_gradients.rowwise() - dots).array()).matrix();
      break;
    }
    case OutputHead::kGaussian: {
      const auto d = static_cast<Eigen::Index>(spec.output_dim);
      delta = output_gradients.topRows(d);
      grad.segment(static_cast<Eigen::Index>(log_std_offset(spec)), d) =
          output_gradients.bottomRows(d).rowwise().sum();
      break;
    }
  }

  backprop(spec, params, layers, cache, std::move(delta), grad);
  return grad;
}

Vector backward_pre_output(const NetworkSpec& spec, const ParameterSet& params, const ForwardCache& cache,
                           const Matrix& pre_output_gradients) {
  check_params(spec, params);
  if (pre_output_gradients.rows() != cache.pre_output.rows() ||
      pre_output_gradients.cols() != cache.pre_output.cols()) {
    throw DomainError("pre-output gradient shape does not match forward output");
  }
  Vector grad = Vector::Zero(params.values.size());
  backprop(spec, params, layer_map(spec), cache, pre_output_gradients, grad);
  return grad;
}

Vector forward(const NetworkSpec& spec, const ParameterSet& params, std::span<const double> input) {
  const Matrix x = Eigen::Map<const Vector>(input.data(), static_cast<Eigen::Index>(input.size()));
  return forward_batch(spec, params, x).output.col(0);
}

Vector backward(const NetworkSpec& spec, const ParameterSet& params, std::span<const double> input,
                std::span<const double> output_gradient) {
  const Matrix x = Eigen::Map<const Vector>(input.data(), static_cast<Eigen::Index>(input.size()));
  const ForwardCache cache = forward_batch(spec, params, x);
  if (output_gradient.size() != static_cast<std::size_t>(cache.output.rows())) {
    throw DomainError("output gradient length does not match network output");
  }
  const Matrix g = Eigen::Map<const Vector>(output_gradient.data(),
                                            static_cast<Eigen::Index>(output_gradient.size()));
  return backward_batch(spec, params, cache, g);
}

AdamMoments AdamMoments::zeros(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  return AdamMoments{Vector::Zero(size), Vector::Zero(size), 0};
}

void adam_update_inplace(ParameterSet& params, const Vector& gradient, AdamMoments& m,
                         const AdamHyper& hyper) {
  if (gradient.size() != params.values.size() || m.first.size() != params.values.size() ||
      m.second.size() != params.values.size()) {
    throw DomainError("Adam: parameter, gradient and moment sizes differ");
  }
  if (!gradient.allFinite()) throw TrainingError("Adam: non-finite gradient");
  double scale = 1.0;
  if (hyper.max_grad_norm > 0.0) {
    const double norm = gradient.norm();
    if (norm > hyper.max_grad_norm) scale = hyper.max_grad_norm / norm;
  }
  ++m.step;
  m.first = hyper.beta1 * m.first + (1.0 - hyper.beta1) * scale * gradient;
  m.second = hyper.beta2 * m.second + (1.0 - hyper.beta2) * (scale * gradient).cwiseAbs2();
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(m.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(m.step));
  params.values.array() -= hyper.learning_rate * (m.first.array() / c1) /
                           ((m.second.array() / c2).sqrt() + hyper.epsilon);
}

AdamResult adam_update(const ParameterSet& params, const Vector& gradient, const AdamMoments& moments,
                       const AdamHyper& hyper) {
  AdamResult r{params, moments};
  adam_update_inplace(r.params, gradient, r.moments, hyper);
  return r;
}

// ---------------------------------------------------------------------------
// checkpoints

void write_checkpoint(std::ostream& out, const NetworkSpec& spec, const ParameterSet& params) {
  check_params(spec, params);
  out << "gtdispatch-mlp 1\n";
  out << "input_dim " << spec.input_dim << '\n';
  out << "hidden";
  for (const auto w : spec.hidden_layers) out << ' ' << w;
  out << '\n';
  out << "activation " << to_string(spec.activation) << '\n';
  out << "output_dim " << spec.output_dim << '\n';
  out << "head " << to_string(spec.output_head) << '\n';
  out << "params " << params.values.size() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < params.values.size(); ++i) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, params.values[i]);
    out.write(buf, ptr - buf);
    out << '\n';
  }
}

namespace {

std::string expect_line(std::istream& in, const std::string& key, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("checkpoint", line_no + 1, "unexpected end of file");
  ++line_no;
  if (line.rfind(key, 0) != 0) {
    throw ParseError("checkpoint", line_no, "expected '" + key + "'");
  }
  return line.size() > key.size() ? line.substr(key.size() + 1) : std::string{};
}

std::size_t to_size(const std::string& text, std::size_t line_no) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("checkpoint", line_no, "expected an integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

void read_checkpoint(std::istream& in, NetworkSpec& spec, ParameterSet& params) {
  std::size_t line_no = 0;
  if (expect_line(in, "gtdispatch-mlp", line_no) != "1") {
    throw ParseError("checkpoint", line_no, "unsupported checkpoint version");
  }
  NetworkSpec s;
  s.input_dim = to_size(expect_line(in, "input_dim", line_no), line_no);
  {
    std::istringstream widths(expect_line(in, "hidden", line_no));
    s.hidden_layers.clear();
    std::size_t w;
    while (widths >> w) s.hidden_layers.push_back(w);
  }
  try {
    s.activation = parse_activation(expect_line(in, "activation", line_no));
    s.output_dim = to_size(expect_line(in, "output_dim", line_no), line_no);
    s.output_head = parse_output_head(expect_line(in, "head", line_no));
  } catch (const ConfigError& e) {
    throw ParseError("checkpoint", line_no, e.what());
  }
  const std::size_t count = to_size(expect_line(in, "params", line_no), line_no);
  validate(s);
  if (count != parameter_count(s)) throw ParseError("checkpoint", line_no, "parameter count mismatch");
  ParameterSet p;
  p.values.resize(static_cast<Eigen::Index>(count));
  std::string line;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw ParseError("checkpoint", line_no + 1, "truncated parameter list");
    ++line_no;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw ParseError("checkpoint", line_no, "bad parameter value '" + line + "'");
    }
    p.values[static_cast<Eigen::Index>(i)] = v;
  }
  spec = std::move(s);
  params = std::move(p);
}

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec, const ParameterSet& params) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  write_checkpoint(out, spec, params);
}

void load_checkpoint(const std::filesystem::path& path, NetworkSpec& spec, ParameterSet& params) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  read_checkpoint(in, spec, params);
}

}  // namespace gtd::nn
