#pragma once

#include <span>
#include <vector>

#include "stscnn/tensor.hpp"

namespace stscnn {

/// max(0, x) elementwise.
template <typename T>
Tensor<T> relu(const Tensor<T>& x);

/// Passes `upstream` where x > 0 and zero elsewhere (the derivative at 0 is 0).
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& upstream);

/// Stacks parts along the channel axis. All parts must share N, H and W.
template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts);

/// Channels [first, first + count) of x.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, int first, int count);

enum class ElementwiseOp { add, sub, mul };

/// a (op) b. b either has a's shape, or is a single-channel map with a's N, H
/// and W that is replicated across a's channels.
template <typename T>
Tensor<T> elementwise(ElementwiseOp op, const Tensor<T>& a, const Tensor<T>& b);

/// a += b for identical shapes.
template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b);

} // namespace stscnn
