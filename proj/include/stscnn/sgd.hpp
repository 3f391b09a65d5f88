#pragma once

#include <span>
#include <vector>

#include "stscnn/conv.hpp"
#include "stscnn/network.hpp"

namespace stscnn {

/// Momentum buffers, one per layer, shape-matching the parameters.
template <typename T>
using Velocity = std::vector<ParamGrad<T>>;

template <typename T>
Velocity<T> zero_velocity(std::span<const ConvLayer<T>> layers);

/// Momentum SGD: v <- momentum * v - lr * g; w <- w + v.
/// Throws NumericError naming the first layer whose gradient is not finite;
/// nothing is modified in that case.
template <typename T>
void sgd_step(std::span<ConvLayer<T>> layers, std::span<const ParamGrad<T>> grads, T lr,
              T momentum, Velocity<T>& velocity);

template <typename T>
void sgd_step(NetworkParams<T>& params, const GradientSet<T>& grads, T lr, T momentum,
              Velocity<T>& velocity) {
    sgd_step<T>(std::span<ConvLayer<T>>(params.layers), std::span<const ParamGrad<T>>(grads.layers),
                lr, momentum, velocity);
}

} // namespace stscnn
