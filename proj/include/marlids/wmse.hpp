#pragma once

#include <span>
#include <vector>

namespace marlids {

/// Weighted mean-square loss: (1/N) * sum_i ((pred_i - target_i) * w_i)^2.
/// Throws ValidationError on length mismatch, empty input or negative weight.
template <typename Scalar>
Scalar wmse_loss(std::span<const Scalar> pred, std::span<const Scalar> target,
                 std::span<const Scalar> sample_weights);

/// d(wmse_loss)/d(pred_i) = (2/N) * w_i^2 * (pred_i - target_i).
template <typename Scalar>
std::vector<Scalar> wmse_gradient(std::span<const Scalar> pred, std::span<const Scalar> target,
                                  std::span<const Scalar> sample_weights);

}  // namespace marlids
