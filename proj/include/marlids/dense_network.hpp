#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace marlids {

enum class Activation : std::uint8_t { kReLU = 0, kLinear = 1 };

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws ConfigError unless 0 < lr, 0 < beta1 < beta2 < 1 and 0 < epsilon.
  void validate() const;
};

/// Fully connected feed-forward network. Layer i maps layer_dims[i] inputs to
/// layer_dims[i+1] outputs through weights (out x in), bias (out) and an
/// activation. Batched calls take one sample per column.
template <typename Scalar>
class DenseNetwork {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix weights;
    Vector bias;
    Activation activation = Activation::kLinear;
  };

  /// Same shapes as the parameters; used both for gradients and Adam moments.
  struct Parameters {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    void set_zero();
    Parameters& operator+=(const Parameters& other);
  };

  struct AdamState {
    Parameters first_moment;
    Parameters second_moment;
    std::uint64_t step = 0;
  };

  /// Per-layer values kept by a batched forward pass for backprop.
  struct ForwardTrace {
    std::vector<Matrix> inputs;       // input to layer i
    std::vector<Matrix> pre_activation;
  };

  /// He-normal weights (std = sqrt(2 / fan_in)), zero biases, ReLU hidden
  /// layers and a linear head. Bit-identical for equal seeds.
  static DenseNetwork initialize(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

  /// Network with explicit parameters; Adam state starts at zero.
  explicit DenseNetwork(std::vector<Layer> layers);

  DenseNetwork() = default;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_layers() const { return layers_.size(); }
  std::vector<std::size_t> layer_dims() const;
  std::size_t parameter_count() const;

  const std::vector<Layer>& layers() const { return layers_; }
  const AdamState& adam_state() const { return adam_; }

  /// Direct parameter access for weight transfer and deserialisation. The
  /// caller keeps shapes consistent; call reset_adam() after reshaping.
  std::vector<Layer>& mutable_layers() { return layers_; }
  AdamState& mutable_adam_state() { return adam_; }
  void reset_adam();

  Vector forward(std::span<const Scalar> input) const;
  Matrix forward_batch(const Matrix& inputs, ForwardTrace* trace = nullptr) const;

  /// Gradient of a scalar loss w.r.t. every parameter, given dLoss/dOutput.
  Parameters backprop(std::span<const Scalar> input, std::span<const Scalar> output_grad) const;
  /// Sum over the batch columns of the per-sample gradients.
  Parameters backprop_batch(const ForwardTrace& trace, const Matrix& output_grads) const;

  /// Bias-corrected Adam update; increments the step counter.
  void adam_step(const Parameters& gradients, const AdamConfig& config);

  Parameters zero_parameters() const;

 private:
  void check_shapes() const;

  std::vector<Layer> layers_;
  AdamState adam_;
};

extern template class DenseNetwork<float>;
extern template class DenseNetwork<double>;

using QNetwork = DenseNetwork<float>;

}  // namespace marlids
