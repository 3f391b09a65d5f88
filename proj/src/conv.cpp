#include "stscnn/conv.hpp"

#include <algorithm>
#include <Eigen/Core>

namespace stscnn {

namespace {

// Upper bound on the im2col buffer, in elements. Large images are processed
// in bands of output rows so memory stays bounded at any scene size.
constexpr std::size_t kColumnBudget = std::size_t{1} << 23;

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using StridedMap = Eigen::Map<RowMajor<T>, 0, Eigen::OuterStride<>>;

template <typename T>
using ConstStridedMap = Eigen::Map<const RowMajor<T>, 0, Eigen::OuterStride<>>;

struct Geometry {
    int channels, height, width;   // input
    int out_h, out_w;
    int kernel, dilation, padding;
    int rows_per_chunk;
    std::size_t k() const { return static_cast<std::size_t>(channels) * kernel * kernel; }
};

template <typename T>
Geometry make_geometry(const Shape& in, const ConvLayer<T>& layer, int padding) {
    layer.validate();
    if (in.c != layer.in_channels) {
        throw ShapeError("conv '" + layer.name + "': input channel count " + std::to_string(in.c) +
                         " does not match layer in_channels " + std::to_string(layer.in_channels));
    }
    if (padding < 0) throw ArgumentError("conv '" + layer.name + "': negative padding");
    Geometry g{};
    g.channels = in.c;
    g.height = in.h;
    g.width = in.w;
    g.kernel = layer.kernel_size;
    g.dilation = layer.dilation;
    g.padding = padding;
    g.out_h = in.h + 2 * padding - layer.extent() + 1;
    g.out_w = in.w + 2 * padding - layer.extent() + 1;
    if (g.out_h < 1 || g.out_w < 1) {
        throw ShapeError("conv '" + layer.name + "': kernel extent " + std::to_string(layer.extent()) +
                         " exceeds padded input " + std::to_string(in.h + 2 * padding) + "x" +
                         std::to_string(in.w + 2 * padding));
    }
    const std::size_t per_row = g.k() * static_cast<std::size_t>(g.out_w);
    g.rows_per_chunk =
        static_cast<int>(std::clamp<std::size_t>(kColumnBudget / per_row, 1, g.out_h));
    return g;
}

// Unfold output rows [r0, r0 + rows) of sample plane block `src` into a
// (K x rows*OW) row-major matrix.
template <typename T>
void im2col(const T* src, const Geometry& g, int r0, int rows, T* cols) {
    const std::size_t P = static_cast<std::size_t>(rows) * g.out_w;
    const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
    for (int i = 0; i < g.channels; ++i) {
        const T* chan = src + i * plane;
        for (int u = 0; u < g.kernel; ++u) {
            for (int v = 0; v < g.kernel; ++v) {
                T* dst = cols + ((static_cast<std::size_t>(i) * g.kernel + u) * g.kernel + v) * P;
                const int dx = v * g.dilation - g.padding;
                const int lo = std::clamp(-dx, 0, g.out_w);
                const int hi = std::clamp(g.width - dx, lo, g.out_w);
                for (int rr = 0; rr < rows; ++rr) {
                    T* d = dst + static_cast<std::size_t>(rr) * g.out_w;
                    const int iy = r0 + rr + u * g.dilation - g.padding;
                    if (iy < 0 || iy >= g.height) {
                        std::fill(d, d + g.out_w, T{0});
                        continue;
                    }
                    const T* s = chan + static_cast<std::size_t>(iy) * g.width;
                    std::fill(d, d + lo, T{0});
                    std::copy(s + (lo + dx), s + (hi + dx), d + lo);
                    std::fill(d + hi, d + g.out_w, T{0});
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-add columns back into the input planes.
template <typename T>
void col2im(const T* cols, const Geometry& g, int r0, int rows, T* dst) {
    const std::size_t P = static_cast<std::size_t>(rows) * g.out_w;
    const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
    for (int i = 0; i < g.channels; ++i) {
        T* chan = dst + i * plane;
        for (int u = 0; u < g.kernel; ++u) {
            for (int v = 0; v < g.kernel; ++v) {
                const T* src = cols + ((static_cast<std::size_t>(i) * g.kernel + u) * g.kernel + v) * P;
                const int dx = v * g.dilation - g.padding;
                const int lo = std::clamp(-dx, 0, g.out_w);
                const int hi = std::clamp(g.width - dx, lo, g.out_w);
                for (int rr = 0; rr < rows; ++rr) {
                    const int iy = r0 + rr + u * g.dilation - g.padding;
                    if (iy < 0 || iy >= g.height) continue;
                    const T* s = src + static_cast<std::size_t>(rr) * g.out_w;
                    T* d = chan + static_cast<std::size_t>(iy) * g.width;
                    for (int x = lo; x < hi; ++x) d[x + dx] += s[x];
                }
            }
        }
    }
}

} // namespace

template <typename T>
ConvLayer<T> ConvLayer<T>::make(std::string name, int in_channels, int out_channels,
                                int kernel_size, int dilation, Activation activation) {
    ConvLayer layer;
    layer.name = std::move(name);
    layer.in_channels = in_channels;
    layer.out_channels = out_channels;
    layer.kernel_size = kernel_size;
    layer.dilation = dilation;
    layer.activation = activation;
    if (in_channels < 1 || out_channels < 1 || kernel_size < 1 || kernel_size % 2 == 0 ||
        dilation < 1) {
        layer.validate();
    }
    layer.weights.assign(static_cast<std::size_t>(out_channels) * in_channels * kernel_size *
                             kernel_size,
                         T{0});
    layer.biases.assign(static_cast<std::size_t>(out_channels), T{0});
    return layer;
}

template <typename T>
void ConvLayer<T>::validate() const {
    const std::string who = "layer '" + name + "': ";
    if (kernel_size < 1 || kernel_size % 2 == 0) {
        throw ConfigError(who + "kernel size must be odd and positive, got " +
                          std::to_string(kernel_size));
    }
    if (dilation < 1) throw ConfigError(who + "dilation must be >= 1");
    if (in_channels < 1 || out_channels < 1) throw ConfigError(who + "channel counts must be >= 1");
    const std::size_t expect = static_cast<std::size_t>(out_channels) * in_channels * kernel_size *
                               kernel_size;
    if (weights.size() != expect || biases.size() != static_cast<std::size_t>(out_channels)) {
        throw ConfigError(who + "parameter storage does not match declared shape");
    }
}

template <typename T>
void ParamGrad<T>::scale(T s) {
    for (auto& v : weights) v *= s;
    for (auto& v : biases) v *= s;
}

template <typename T>
void ParamGrad<T>::accumulate(const ParamGrad& other) {
    if (other.weights.size() != weights.size() || other.biases.size() != biases.size()) {
        throw ShapeError("ParamGrad::accumulate: shape mismatch");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] += other.weights[i];
    for (std::size_t i = 0; i < biases.size(); ++i) biases[i] += other.biases[i];
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvLayer<T>& layer, int padding) {
    const Geometry g = make_geometry(input.shape(), layer, padding);
    const int J = layer.out_channels;
    const auto K = static_cast<Eigen::Index>(g.k());
    const std::size_t out_plane = static_cast<std::size_t>(g.out_h) * g.out_w;
    Tensor<T> out(Shape{input.n(), J, g.out_h, g.out_w});
    std::vector<T> cols(g.k() * static_cast<std::size_t>(g.rows_per_chunk) * g.out_w);
    Eigen::Map<const RowMajor<T>> wmat(layer.weights.data(), J, K);

    for (int n = 0; n < input.n(); ++n) {
        const T* src = input.raw() + input.offset(n, 0, 0, 0);
        T* dst = out.raw() + out.offset(n, 0, 0, 0);
        for (int r0 = 0; r0 < g.out_h; r0 += g.rows_per_chunk) {
            const int rows = std::min(g.rows_per_chunk, g.out_h - r0);
            const auto P = static_cast<Eigen::Index>(rows) * g.out_w;
            im2col(src, g, r0, rows, cols.data());
            Eigen::Map<const RowMajor<T>> cmat(cols.data(), K, P);
            StridedMap<T> omat(dst + static_cast<std::size_t>(r0) * g.out_w, J, P,
                               Eigen::OuterStride<>(static_cast<Eigen::Index>(out_plane)));
            omat.noalias() = wmat * cmat;
        }
        for (int j = 0; j < J; ++j) {
            T* p = dst + j * out_plane;
            const T b = layer.biases[j];
            if (layer.activation == Activation::relu) {
                for (std::size_t i = 0; i < out_plane; ++i) p[i] = std::max(p[i] + b, T{0});
            } else {
                for (std::size_t i = 0; i < out_plane; ++i) p[i] += b;
            }
        }
    }
    return out;
}

template <typename T>
ConvGradients<T> conv2d_backward(const Tensor<T>& input, const ConvLayer<T>& layer,
                                 const Tensor<T>& output, const Tensor<T>& upstream, int padding,
                                 bool need_input_grad) {
    const Geometry g = make_geometry(input.shape(), layer, padding);
    const int J = layer.out_channels;
    const Shape out_shape{input.n(), J, g.out_h, g.out_w};
    require_same_shape(output.shape(), out_shape, "conv '" + layer.name + "' backward output");
    require_same_shape(upstream.shape(), out_shape, "conv '" + layer.name + "' backward upstream");

    // Error map: upstream gated by the activation derivative.
    Tensor<T> delta = upstream;
    if (layer.activation == Activation::relu) {
        auto d = delta.data();
        auto o = output.data();
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!(o[i] > T{0})) d[i] = T{0};
        }
    }

    ConvGradients<T> grads;
    grads.params = ParamGrad<T>::zeros_like(layer);
    if (need_input_grad) grads.input = Tensor<T>(input.shape());

    const auto K = static_cast<Eigen::Index>(g.k());
    const std::size_t out_plane = static_cast<std::size_t>(g.out_h) * g.out_w;
    const std::size_t chunk = g.k() * static_cast<std::size_t>(g.rows_per_chunk) * g.out_w;
    std::vector<T> cols(chunk);
    std::vector<T> dcols(need_input_grad ? chunk : 0);
    Eigen::Map<const RowMajor<T>> wmat(layer.weights.data(), J, K);
    Eigen::Map<RowMajor<T>> dwmat(grads.params.weights.data(), J, K);

    for (int n = 0; n < input.n(); ++n) {
        const T* src = input.raw() + input.offset(n, 0, 0, 0);
        const T* dsrc = delta.raw() + delta.offset(n, 0, 0, 0);
        for (int j = 0; j < J; ++j) {
            const T* p = dsrc + j * out_plane;
            T acc{0};
            for (std::size_t i = 0; i < out_plane; ++i) acc += p[i];
            grads.params.biases[j] += acc;
        }
        for (int r0 = 0; r0 < g.out_h; r0 += g.rows_per_chunk) {
            const int rows = std::min(g.rows_per_chunk, g.out_h - r0);
            const auto P = static_cast<Eigen::Index>(rows) * g.out_w;
            im2col(src, g, r0, rows, cols.data());
            Eigen::Map<const RowMajor<T>> cmat(cols.data(), K, P);
            ConstStridedMap<T> dmat(dsrc + static_cast<std::size_t>(r0) * g.out_w, J, P,
                                    Eigen::OuterStride<>(static_cast<Eigen::Index>(out_plane)));
            dwmat.noalias() += dmat * cmat.transpose();
            if (need_input_grad) {
                Eigen::Map<RowMajor<T>> dcmat(dcols.data(), K, P);
                dcmat.noalias() = wmat.transpose() * dmat;
                col2im(dcols.data(), g, r0, rows, grads.input.raw() + grads.input.offset(n, 0, 0, 0));
            }
        }
    }
    return grads;
}

long long receptive_field(int depth, FieldMode mode) {
    if (depth < 1) throw ArgumentError("receptive_field: depth must be >= 1");
    if (mode == FieldMode::common) return 2LL * depth + 1;
    if (depth > 61) throw ArgumentError("receptive_field: depth too large");
    return (1LL << (depth + 1)) - 1;
}

long long stack_receptive_field(const std::vector<int>& kernel_sizes,
                                const std::vector<int>& dilations) {
    if (kernel_sizes.size() != dilations.size()) {
        throw ArgumentError("stack_receptive_field: kernel/dilation lists differ in length");
    }
    long long field = 1;
    for (std::size_t i = 0; i < kernel_sizes.size(); ++i) {
        field += static_cast<long long>(dilations[i]) * (kernel_sizes[i] - 1);
    }
    return field;
}

#define STSCNN_INSTANTIATE(T)                                                                      \
    template struct ConvLayer<T>;                                                                  \
    template struct ParamGrad<T>;                                                                  \
    template Tensor<T> conv2d_forward(const Tensor<T>&, const ConvLayer<T>&, int);                 \
    template ConvGradients<T> conv2d_backward(const Tensor<T>&, const ConvLayer<T>&,               \
                                              const Tensor<T>&, const Tensor<T>&, int, bool);

STSCNN_INSTANTIATE(float)
STSCNN_INSTANTIATE(double)

#undef STSCNN_INSTANTIATE

} // namespace stscnn
