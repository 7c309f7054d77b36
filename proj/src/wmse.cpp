#include "marlids/wmse.hpp"

#include "marlids/errors.hpp"

namespace marlids {
namespace {

template <typename Scalar>
void check(std::span<const Scalar> pred, std::span<const Scalar> target, std::span<const Scalar> w) {
  if (pred.empty()) throw ValidationError("wmse: empty input");
  if (pred.size() != target.size() || pred.size() != w.size()) {
    throw ValidationError("wmse: pred, target and weights must have equal length");
  }
  for (auto x : w) {
    if (!(x >= Scalar(0))) throw ValidationError("wmse: sample weights must be >= 0");
  }
}

}  // namespace

template <typename Scalar>
Scalar wmse_loss(std::span<const Scalar> pred, std::span<const Scalar> target,
                 std::span<const Scalar> sample_weights) {
  check(pred, target, sample_weights);
  Scalar sum = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Scalar r = (pred[i] - target[i]) * sample_weights[i];
    sum += r * r;
  }
  return sum / static_cast<Scalar>(pred.size());
}

template <typename Scalar>
std::vector<Scalar> wmse_gradient(std::span<const Scalar> pred, std::span<const Scalar> target,
                                  std::span<const Scalar> sample_weights) {
  check(pred, target, sample_weights);
  const Scalar scale = Scalar(2) / static_cast<Scalar>(pred.size());
  std::vector<Scalar> grad(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    grad[i] = scale * sample_weights[i] * sample_weights[i] * (pred[i] - target[i]);
  }
  return grad;
}

template float wmse_loss<float>(std::span<const float>, std::span<const float>, std::span<const float>);
template double wmse_loss<double>(std::span<const double>, std::span<const double>, std::span<const double>);
template std::vector<float> wmse_gradient<float>(std::span<const float>, std::span<const float>,
                                                 std::span<const float>);
template std::vector<double> wmse_gradient<double>(std::span<const double>, std::span<const double>,
                                                   std::span<const double>);

}  // namespace marlids
