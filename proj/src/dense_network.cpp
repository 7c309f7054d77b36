#include "marlids/dense_network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "marlids/errors.hpp"

namespace marlids {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("adam: learning_rate must be > 0");
  }
  if (!(beta1 > 0.0 && beta1 < beta2 && beta2 < 1.0)) {
    throw ConfigError("adam: require 0 < beta1 < beta2 < 1");
  }
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be > 0");
}

template <typename Scalar>
void DenseNetwork<Scalar>::Parameters::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

template <typename Scalar>
typename DenseNetwork<Scalar>::Parameters& DenseNetwork<Scalar>::Parameters::operator+=(
    const Parameters& other) {
  if (other.weights.size() != weights.size()) throw ValidationError("parameter sets differ in depth");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] += other.weights[i];
    biases[i] += other.biases[i];
  }
  return *this;
}

template <typename Scalar>
DenseNetwork<Scalar> DenseNetwork<Scalar>::initialize(const std::vector<std::size_t>& layer_dims,
                                                      std::uint64_t seed) {
  if (layer_dims.size() < 2) throw ValidationError("network needs at least input and output dims");
  for (auto d : layer_dims) {
    if (d == 0) throw ValidationError("layer dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  layers.reserve(layer_dims.size() - 1);
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    const auto fan_in = layer_dims[i];
    const auto fan_out = layer_dims[i + 1];
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    Layer layer;
    layer.weights.resize(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = static_cast<Scalar>(dist(rng));
      }
    }
    layer.bias = Vector::Zero(static_cast<Eigen::Index>(fan_out));
    layer.activation = (i + 2 == layer_dims.size()) ? Activation::kLinear : Activation::kReLU;
    layers.push_back(std::move(layer));
  }
  return DenseNetwork(std::move(layers));
}

template <typename Scalar>
DenseNetwork<Scalar>::DenseNetwork(std::vector<Layer> layers) : layers_(std::move(layers)) {
  check_shapes();
  reset_adam();
}

template <typename Scalar>
void DenseNetwork<Scalar>::check_shapes() const {
  if (layers_.empty()) throw ValidationError("network has no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weights.rows() == 0 || l.weights.cols() == 0) {
      throw ValidationError("layer " + std::to_string(i) + " has an empty weight matrix");
    }
    if (l.bias.size() != l.weights.rows()) {
      throw ValidationError("layer " + std::to_string(i) + " bias length differs from output dim");
    }
    if (i > 0 && layers_[i - 1].weights.rows() != l.weights.cols()) {
      throw ValidationError("layer " + std::to_string(i) + " input dim differs from previous output");
    }
  }
}

template <typename Scalar>
std::size_t DenseNetwork<Scalar>::input_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.cols());
}

template <typename Scalar>
std::size_t DenseNetwork<Scalar>::output_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weights.rows());
}

template <typename Scalar>
std::vector<std::size_t> DenseNetwork<Scalar>::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers_.empty()) return dims;
  dims.push_back(input_dim());
  for (const auto& l : layers_) dims.push_back(static_cast<std::size_t>(l.weights.rows()));
  return dims;
}

template <typename Scalar>
std::size_t DenseNetwork<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

template <typename Scalar>
typename DenseNetwork<Scalar>::Parameters DenseNetwork<Scalar>::zero_parameters() const {
  Parameters p;
  for (const auto& l : layers_) {
    p.weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    p.biases.push_back(Vector::Zero(l.bias.size()));
  }
  return p;
}

template <typename Scalar>
void DenseNetwork<Scalar>::reset_adam() {
  adam_.first_moment = zero_parameters();
  adam_.second_moment = zero_parameters();
  adam_.step = 0;
}

namespace {

template <typename M>
void apply_activation(M& values, Activation act) {
  if (act == Activation::kReLU) values = values.cwiseMax(typename M::Scalar(0));
}

}  // namespace

template <typename Scalar>
typename DenseNetwork<Scalar>::Vector DenseNetwork<Scalar>::forward(std::span<const Scalar> input) const {
  if (input.size() != input_dim()) {
    throw ValidationError("forward: input has " + std::to_string(input.size()) + " entries, network expects " +
                          std::to_string(input_dim()));
  }
  Eigen::Map<const Vector> x(input.data(), static_cast<Eigen::Index>(input.size()));
  if (!x.allFinite()) throw ValidationError("forward: input contains non-finite values");
  Vector h = x;
  for (const auto& l : layers_) {
    Vector z = l.weights * h + l.bias;
    apply_activation(z, l.activation);
    h = std::move(z);
  }
  return h;
}

template <typename Scalar>
typename DenseNetwork<Scalar>::Matrix DenseNetwork<Scalar>::forward_batch(const Matrix& inputs,
                                                                          ForwardTrace* trace) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_dim()) {
    throw ValidationError("forward_batch: input rows " + std::to_string(inputs.rows()) +
                          " differ from network input dim " + std::to_string(input_dim()));
  }
  if (!inputs.allFinite()) throw ValidationError("forward_batch: input contains non-finite values");
  if (trace != nullptr) {
    trace->inputs.resize(layers_.size());
    trace->pre_activation.resize(layers_.size());
  }
  Matrix h = inputs;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    Matrix z = l.weights * h;
    z.colwise() += l.bias;
    if (trace != nullptr) {
      trace->inputs[i] = std::move(h);
      trace->pre_activation[i] = z;
    }
    apply_activation(z, l.activation);
    h = std::move(z);
  }
  return h;
}

template <typename Scalar>
typename DenseNetwork<Scalar>::Parameters DenseNetwork<Scalar>::backprop(
    std::span<const Scalar> input, std::span<const Scalar> output_grad) const {
  if (output_grad.size() != output_dim()) {
    throw ValidationError("backprop: output gradient has " + std::to_string(output_grad.size()) +
                          " entries, network outputs " + std::to_string(output_dim()));
  }
  if (input.size() != input_dim()) throw ValidationError("backprop: input dimension mismatch");
  Matrix x = Eigen::Map<const Vector>(input.data(), static_cast<Eigen::Index>(input.size()));
  ForwardTrace trace;
  forward_batch(x, &trace);
  Matrix g = Eigen::Map<const Vector>(output_grad.data(), static_cast<Eigen::Index>(output_grad.size()));
  return backprop_batch(trace, g);
}

template <typename Scalar>
typename DenseNetwork<Scalar>::Parameters DenseNetwork<Scalar>::backprop_batch(
    const ForwardTrace& trace, const Matrix& output_grads) const {
  if (trace.inputs.size() != layers_.size()) throw ValidationError("backprop: trace depth mismatch");
  if (static_cast<std::size_t>(output_grads.rows()) != output_dim() ||
      output_grads.cols() != trace.inputs.front().cols()) {
    throw ValidationError("backprop: output gradient shape mismatch");
  }
  Parameters grads;
  grads.weights.resize(layers_.size());
  grads.biases.resize(layers_.size());
  Matrix delta = output_grads;  // dLoss/d(activation output) of the current layer
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    if (l.activation == Activation::kReLU) {
      delta = delta.cwiseProduct(
          (trace.pre_activation[k].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
    grads.weights[k].noalias() = delta * trace.inputs[k].transpose();
    grads.biases[k] = delta.rowwise().sum();
    if (k > 0) {
      Matrix next = l.weights.transpose() * delta;
      delta = std::move(next);
    }
  }
  return grads;
}

template <typename Scalar>
void DenseNetwork<Scalar>::adam_step(const Parameters& gradients, const AdamConfig& config) {
  if (gradients.weights.size() != layers_.size() || gradients.biases.size() != layers_.size()) {
    throw ValidationError("adam_step: gradient depth differs from network depth");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (gradients.weights[i].rows() != layers_[i].weights.rows() ||
        gradients.weights[i].cols() != layers_[i].weights.cols() ||
        gradients.biases[i].size() != layers_[i].bias.size()) {
      throw ValidationError("adam_step: gradient shape mismatch at layer " + std::to_string(i));
    }
  }
  adam_.step += 1;
  const double t = static_cast<double>(adam_.step);
  const auto b1 = static_cast<Scalar>(config.beta1);
  const auto b2 = static_cast<Scalar>(config.beta2);
  const auto c1 = static_cast<Scalar>(1.0 / (1.0 - std::pow(config.beta1, t)));
  const auto c2 = static_cast<Scalar>(1.0 / (1.0 - std::pow(config.beta2, t)));
  const auto lr = static_cast<Scalar>(config.learning_rate);
  const auto eps = static_cast<Scalar>(config.epsilon);

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() * c1) / ((v.array() * c2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    update(layers_[i].weights, adam_.first_moment.weights[i], adam_.second_moment.weights[i],
           gradients.weights[i]);
    update(layers_[i].bias, adam_.first_moment.biases[i], adam_.second_moment.biases[i], gradients.biases[i]);
  }
}

template class DenseNetwork<float>;
template class DenseNetwork<double>;

}  // namespace marlids
