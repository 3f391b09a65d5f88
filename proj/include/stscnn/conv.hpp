#pragma once

#include <string>
#include <vector>

#include "stscnn/tensor.hpp"

namespace stscnn {

enum class Activation { relu, linear };

/// Parameters of one stride-1 dilated convolution.
///
/// Weights are laid out (out_channels, in_channels, S, S) row-major. The layer
/// computes a cross-correlation: with padding p,
///
///   out(n, j, y, x) = F(b_j + sum_{i,u,v} W(j, i, u, v) * in(n, i, y - p + d*u, x - p + d*v))
///
/// where taps falling outside the input read zero. With the default "same"
/// padding p = d*(S-1)/2 the taps are centred on (y, x).
template <typename T>
struct ConvLayer {
    std::string name;
    int in_channels = 0;
    int out_channels = 0;
    int kernel_size = 3;
    int dilation = 1;
    Activation activation = Activation::relu;
    std::vector<T> weights;
    std::vector<T> biases;

    /// Zero-initialised layer; throws ConfigError on even/non-positive S,
    /// non-positive dilation or channel counts.
    static ConvLayer make(std::string name, int in_channels, int out_channels, int kernel_size,
                          int dilation, Activation activation);

    std::size_t weight_count() const { return weights.size(); }
    std::size_t parameter_count() const { return weights.size() + biases.size(); }
    int same_padding() const { return dilation * (kernel_size - 1) / 2; }
    int extent() const { return dilation * (kernel_size - 1) + 1; }
    void validate() const;

    T& weight(int j, int i, int u, int v) {
        return weights[((static_cast<std::size_t>(j) * in_channels + i) * kernel_size + u) *
                           kernel_size + v];
    }
    const T& weight(int j, int i, int u, int v) const {
        return weights[((static_cast<std::size_t>(j) * in_channels + i) * kernel_size + u) *
                           kernel_size + v];
    }

    template <typename U>
    ConvLayer<U> cast() const {
        return ConvLayer<U>{name,
                            in_channels,
                            out_channels,
                            kernel_size,
                            dilation,
                            activation,
                            std::vector<U>(weights.begin(), weights.end()),
                            std::vector<U>(biases.begin(), biases.end())};
    }

    bool operator==(const ConvLayer&) const = default;
};

/// Gradient with respect to one layer's weights and biases.
template <typename T>
struct ParamGrad {
    std::vector<T> weights;
    std::vector<T> biases;

    static ParamGrad zeros_like(const ConvLayer<T>& layer) {
        return {std::vector<T>(layer.weights.size(), T{0}),
                std::vector<T>(layer.biases.size(), T{0})};
    }
    void scale(T s);
    void accumulate(const ParamGrad& other);
};

template <typename T>
struct ConvGradients {
    ParamGrad<T> params;
    Tensor<T> input;  // empty when the caller skipped the input gradient
};

/// Forward pass with explicit per-side zero padding.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvLayer<T>& layer, int padding);

/// Forward pass with "same" padding: output H, W equal input H, W.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvLayer<T>& layer) {
    return conv2d_forward(input, layer, layer.same_padding());
}

/// Backward pass. `output` is the forward result (post-activation), used to
/// gate the upstream gradient through ReLU; `upstream` is dL/d(output).
template <typename T>
ConvGradients<T> conv2d_backward(const Tensor<T>& input, const ConvLayer<T>& layer,
                                 const Tensor<T>& output, const Tensor<T>& upstream, int padding,
                                 bool need_input_grad = true);

template <typename T>
ConvGradients<T> conv2d_backward(const Tensor<T>& input, const ConvLayer<T>& layer,
                                 const Tensor<T>& output, const Tensor<T>& upstream,
                                 bool need_input_grad = true) {
    return conv2d_backward(input, layer, output, upstream, layer.same_padding(), need_input_grad);
}

/// Backward pass that recomputes the forward output itself.
template <typename T>
ConvGradients<T> conv2d_backward(const Tensor<T>& input, const ConvLayer<T>& layer,
                                 const Tensor<T>& upstream) {
    return conv2d_backward(input, layer, conv2d_forward(input, layer), upstream);
}

enum class FieldMode { common, dilated_pyramid };

/// Side length of the square receptive field after `depth` stacked 3x3
/// layers: 2*depth + 1 for plain convolutions, 2^(depth+1) - 1 when the
/// dilation doubles per layer.
long long receptive_field(int depth, FieldMode mode);

/// Side length of the receptive field of a stack of same-padded layers with
/// the given kernel sizes and dilations.
long long stack_receptive_field(const std::vector<int>& kernel_sizes,
                                const std::vector<int>& dilations);

} // namespace stscnn
