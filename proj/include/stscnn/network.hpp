#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stscnn/conv.hpp"
#include "stscnn/mask.hpp"
#include "stscnn/tensor.hpp"

namespace stscnn {

/// Shape of the two-input residual reconstruction network.
///
/// Defaults give the full architecture: two 30-map fusion convolutions,
/// a 3/5/7 multi-scale block of 20 maps per branch, five 3x3 dilated layers
/// (1, 2, 3, 2, 1) over a 60-map trunk, the boosting path and a linear
/// output layer. The two switches exist for component ablations.
struct NetworkConfig {
    int input_bands = 2;
    int fusion_channels = 30;
    int multiscale_channels = 20;
    std::vector<int> dilations{1, 2, 3, 2, 1};
    int trunk_channels = 60;
    bool multiscale = true;  // false: one 3x3 trunk->trunk conv replaces the block
    bool boost = true;       // false: no boosting path

    void validate() const;
    bool operator==(const NetworkConfig&) const = default;
};

/// Layer indices inside NetworkParams::layers for a given config.
struct LayerLayout {
    std::size_t fusion_y1 = 0;
    std::size_t fusion_y2 = 1;
    std::vector<std::size_t> multiscale;  // one entry when the block is ablated
    std::optional<std::size_t> boost;
    std::vector<std::size_t> dilated;
    std::size_t output = 0;
    /// Dilated-layer positions whose outputs receive the boosting maps
    /// (after the first and the second-to-last layer).
    std::vector<std::size_t> boost_after;
};

LayerLayout layer_layout(const NetworkConfig& config);

template <typename T>
struct NetworkParams {
    NetworkConfig config;
    std::vector<ConvLayer<T>> layers;

    std::size_t parameter_count() const;
    const ConvLayer<T>& layer(std::string_view name) const;

    template <typename U>
    NetworkParams<U> cast() const {
        NetworkParams<U> out{config, {}};
        out.layers.reserve(layers.size());
        for (const auto& l : layers) out.layers.push_back(l.template cast<U>());
        return out;
    }

    bool operator==(const NetworkParams&) const = default;
};

/// Per-layer parameter gradients, index-aligned with NetworkParams::layers.
template <typename T>
struct GradientSet {
    std::vector<ParamGrad<T>> layers;

    static GradientSet zeros_like(const NetworkParams<T>& params);
    void scale(T s);
    void accumulate(const GradientSet& other);
};

/// One training example: ground truth, corrupted input, auxiliary input and
/// the validity mask of the corrupted input.
struct TrainingSample {
    Tensor4 x;
    Tensor4 y1;
    Tensor4 y2;
    Mask mask;
};

/// Builds a sample with y1 = x * mask (missing pixels zero).
TrainingSample make_sample(Tensor4 x, Tensor4 y2, Mask mask);

/// All layers zero-biased, weights ~ N(0, 2 / (in_channels * S^2)).
NetworkParams<double> build_network(const NetworkConfig& config, std::uint64_t seed);

/// Intermediate activations kept by forward() for backward().
template <typename T>
struct ForwardCache {
    bool filled_in = false;
    Tensor<T> y1, y2;
    Tensor<T> composite;               // y1 + (1 - mask) * y2
    Tensor<T> f1, f2, t0;              // fusion outputs and their concatenation
    std::vector<Tensor<T>> ms;         // multi-scale branch outputs
    Tensor<T> t1;                      // block output + identity skip
    Tensor<T> boost;                   // boosting maps
    std::vector<Tensor<T>> dil_in;     // input of each dilated layer
    std::vector<Tensor<T>> dil_out;    // post-ReLU output of each dilated layer
    Tensor<T> head_in;                 // input of the output layer
    Tensor<T> residual;
};

/// Predicts the residual r = y1 - x. y1 and y2 are N x B x H x W; the mask
/// applies to every sample of the batch.
template <typename T>
Tensor<T> forward(const NetworkParams<T>& params, const Tensor<T>& y1, const Tensor<T>& y2,
                  const Mask& mask, ForwardCache<T>* cache = nullptr);

struct LossValue {
    double value = 0.0;      // (1 / 2N) * sum ||residual_hat - (y1 - x)||^2
    double per_pixel = 0.0;  // mean squared error over every element
};

template <typename T>
LossValue loss_mse(const Tensor<T>& residual_hat, const Tensor<T>& y1, const Tensor<T>& x);

/// d loss / d residual_hat = (residual_hat - (y1 - x)) / N.
template <typename T>
Tensor<T> loss_gradient(const Tensor<T>& residual_hat, const Tensor<T>& y1, const Tensor<T>& x);

/// Back-propagates d_residual through the graph recorded in `cache`.
template <typename T>
GradientSet<T> backward(const NetworkParams<T>& params, const ForwardCache<T>& cache,
                        const Tensor<T>& d_residual);

/// Gradient of loss_mse for the sample that produced `cache`.
template <typename T>
GradientSet<T> backward(const NetworkParams<T>& params, const ForwardCache<T>& cache,
                        const Tensor<T>& y1, const Tensor<T>& x);

struct ValueRange {
    double lo = 0.0;
    double hi = 1.0;
};

/// x_hat = y1 at valid pixels (bitwise) and clamp(y1 - forward(...)) in gaps.
template <typename T>
Tensor<T> reconstruct(const NetworkParams<T>& params, const Tensor<T>& y1, const Tensor<T>& y2,
                      const Mask& mask, ValueRange range = {});

} // namespace stscnn
