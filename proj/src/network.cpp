#include "stscnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stscnn/ops.hpp"

namespace stscnn {

void NetworkConfig::validate() const {
    if (input_bands < 1) throw ConfigError("network: input_bands must be >= 1");
    if (fusion_channels < 1 || multiscale_channels < 1 || trunk_channels < 1) {
        throw ConfigError("network: channel counts must be >= 1");
    }
    if (2 * fusion_channels != trunk_channels) {
        throw ConfigError("network: 2 * fusion_channels (" + std::to_string(2 * fusion_channels) +
                          ") must equal trunk_channels (" + std::to_string(trunk_channels) + ")");
    }
    if (3 * multiscale_channels != trunk_channels) {
        throw ConfigError("network: 3 * multiscale_channels (" +
                          std::to_string(3 * multiscale_channels) +
                          ") must equal trunk_channels (" + std::to_string(trunk_channels) + ")");
    }
    if (dilations.empty()) throw ConfigError("network: dilations must be non-empty");
    for (int d : dilations) {
        if (d < 1) throw ConfigError("network: dilation factors must be >= 1");
    }
}

LayerLayout layer_layout(const NetworkConfig& config) {
    LayerLayout lay;
    std::size_t next = 2;
    const std::size_t branches = config.multiscale ? 3 : 1;
    for (std::size_t k = 0; k < branches; ++k) lay.multiscale.push_back(next++);
    if (config.boost) lay.boost = next++;
    for (std::size_t k = 0; k < config.dilations.size(); ++k) lay.dilated.push_back(next++);
    lay.output = next;
    if (config.boost) {
        const std::size_t count = config.dilations.size();
        lay.boost_after.push_back(0);
        if (count >= 2 && count - 2 != 0) lay.boost_after.push_back(count - 2);
    }
    return lay;
}

namespace {

template <typename T>
std::vector<ConvLayer<T>> empty_layers(const NetworkConfig& cfg) {
    const int B = cfg.input_bands;
    const int F = cfg.fusion_channels;
    const int C = cfg.trunk_channels;
    std::vector<ConvLayer<T>> layers;
    layers.push_back(ConvLayer<T>::make("conv_y1", B, F, 3, 1, Activation::relu));
    layers.push_back(ConvLayer<T>::make("conv_y2", B, F, 3, 1, Activation::relu));
    if (cfg.multiscale) {
        for (int s : {3, 5, 7}) {
            layers.push_back(ConvLayer<T>::make("ms" + std::to_string(s), C,
                                                cfg.multiscale_channels, s, 1, Activation::relu));
        }
    } else {
        layers.push_back(ConvLayer<T>::make("ms_single", C, C, 3, 1, Activation::relu));
    }
    if (cfg.boost) layers.push_back(ConvLayer<T>::make("boost_conv", B, C, 3, 1, Activation::relu));
    for (std::size_t k = 0; k < cfg.dilations.size(); ++k) {
        layers.push_back(ConvLayer<T>::make("dilated" + std::to_string(k + 1), C, C, 3,
                                            cfg.dilations[k], Activation::relu));
    }
    layers.push_back(ConvLayer<T>::make("output_conv", C, B, 3, 1, Activation::linear));
    return layers;
}

template <typename T>
void check_params(const NetworkParams<T>& params) {
    params.config.validate();
    const auto expect = empty_layers<T>(params.config);
    if (expect.size() != params.layers.size()) {
        throw ConfigError("network: expected " + std::to_string(expect.size()) + " layers, got " +
                          std::to_string(params.layers.size()));
    }
    for (std::size_t i = 0; i < expect.size(); ++i) {
        const auto& a = expect[i];
        const auto& b = params.layers[i];
        if (a.in_channels != b.in_channels || a.out_channels != b.out_channels ||
            a.kernel_size != b.kernel_size || a.dilation != b.dilation ||
            a.activation != b.activation) {
            throw ConfigError("network: layer " + std::to_string(i) + " ('" + b.name +
                              "') does not match the configured architecture");
        }
        b.validate();
    }
}

template <typename T>
void add_at_junction(Tensor<T>& a, const Tensor<T>& b, const char* junction) {
    require_same_shape(a.shape(), b.shape(), std::string("junction ") + junction);
    auto pa = a.data();
    auto pb = b.data();
    for (std::size_t i = 0; i < pa.size(); ++i) pa[i] += pb[i];
}

bool contains(const std::vector<std::size_t>& v, std::size_t k) {
    return std::find(v.begin(), v.end(), k) != v.end();
}

} // namespace

template <typename T>
std::size_t NetworkParams<T>::parameter_count() const {
    std::size_t total = 0;
    for (const auto& l : layers) total += l.parameter_count();
    return total;
}

template <typename T>
const ConvLayer<T>& NetworkParams<T>::layer(std::string_view name) const {
    for (const auto& l : layers) {
        if (l.name == name) return l;
    }
    throw ArgumentError("network: no layer named '" + std::string(name) + "'");
}

template <typename T>
GradientSet<T> GradientSet<T>::zeros_like(const NetworkParams<T>& params) {
    GradientSet g;
    g.layers.reserve(params.layers.size());
    for (const auto& l : params.layers) g.layers.push_back(ParamGrad<T>::zeros_like(l));
    return g;
}

template <typename T>
void GradientSet<T>::scale(T s) {
    for (auto& l : layers) l.scale(s);
}

template <typename T>
void GradientSet<T>::accumulate(const GradientSet& other) {
    if (other.layers.size() != layers.size()) throw ShapeError("GradientSet: layer count mismatch");
    for (std::size_t i = 0; i < layers.size(); ++i) layers[i].accumulate(other.layers[i]);
}

TrainingSample make_sample(Tensor4 x, Tensor4 y2, Mask mask) {
    require_same_shape(x.shape(), y2.shape(), "make_sample: x/y2");
    require_mask_fits(mask, x.shape(), "make_sample");
    Tensor4 y1 = apply_mask(x, mask, 0.0);
    return TrainingSample{std::move(x), std::move(y1), std::move(y2), std::move(mask)};
}

NetworkParams<double> build_network(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    NetworkParams<double> params{config, empty_layers<double>(config)};
    std::mt19937_64 rng(seed);
    for (auto& layer : params.layers) {
        const double fan_in =
            static_cast<double>(layer.in_channels) * layer.kernel_size * layer.kernel_size;
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        for (auto& w : layer.weights) w = dist(rng);
    }
    return params;
}

template <typename T>
Tensor<T> forward(const NetworkParams<T>& params, const Tensor<T>& y1, const Tensor<T>& y2,
                  const Mask& mask, ForwardCache<T>* cache) {
    check_params(params);
    const auto& cfg = params.config;
    require_same_shape(y1.shape(), y2.shape(), "forward: inputs y1/y2");
    if (y1.c() != cfg.input_bands) {
        throw ShapeError("forward: input has " + std::to_string(y1.c()) + " bands, network expects " +
                         std::to_string(cfg.input_bands));
    }
    require_mask_fits(mask, y1.shape(), "forward");
    const LayerLayout lay = layer_layout(cfg);
    const auto& L = params.layers;

    // Multi-source fusion.
    Tensor<T> f1 = conv2d_forward(y1, L[lay.fusion_y1]);
    Tensor<T> f2 = conv2d_forward(y2, L[lay.fusion_y2]);
    const std::vector<Tensor<T>> fused{f1, f2};
    Tensor<T> t0 = concat_channels<T>(fused);

    // Multi-scale block with identity skip.
    std::vector<Tensor<T>> ms;
    for (std::size_t idx : lay.multiscale) ms.push_back(conv2d_forward(t0, L[idx]));
    Tensor<T> t1 = ms.size() == 1 ? ms.front() : concat_channels<T>(ms);
    add_at_junction(t1, t0, "multiscale skip");

    // Gap-filled composite feeding the boosting path.
    Tensor<T> composite = y1;
    Tensor<T> boost;
    {
        auto m = mask.values();
        for (int n = 0; n < y1.n(); ++n) {
            for (int c = 0; c < y1.c(); ++c) {
                auto dst = composite.plane(n, c);
                auto aux = y2.plane(n, c);
                for (std::size_t i = 0; i < dst.size(); ++i) {
                    dst[i] += (T{1} - static_cast<T>(m[i])) * aux[i];
                }
            }
        }
        if (lay.boost) boost = conv2d_forward(composite, L[*lay.boost]);
    }

    // Dilated stack with boosting and identity skips.
    std::vector<Tensor<T>> dil_in;
    std::vector<Tensor<T>> dil_out;
    Tensor<T> h = t1;
    for (std::size_t k = 0; k < lay.dilated.size(); ++k) {
        Tensor<T> u = conv2d_forward(h, L[lay.dilated[k]]);
        dil_in.push_back(std::move(h));
        h = u;
        if (contains(lay.boost_after, k)) add_at_junction(h, boost, "boost injection");
        dil_out.push_back(std::move(u));
    }
    add_at_junction(h, t1, "dilated-stack skip");

    Tensor<T> residual = conv2d_forward(h, L[lay.output]);

    if (cache) {
        cache->filled_in = true;
        cache->y1 = y1;
        cache->y2 = y2;
        cache->composite = std::move(composite);
        cache->f1 = std::move(f1);
        cache->f2 = std::move(f2);
        cache->t0 = std::move(t0);
        cache->ms = std::move(ms);
        cache->t1 = std::move(t1);
        cache->boost = std::move(boost);
        cache->dil_in = std::move(dil_in);
        cache->dil_out = std::move(dil_out);
        cache->head_in = std::move(h);
        cache->residual = residual;
    }
    return residual;
}

template <typename T>
LossValue loss_mse(const Tensor<T>& residual_hat, const Tensor<T>& y1, const Tensor<T>& x) {
    require_same_shape(residual_hat.shape(), y1.shape(), "loss_mse: residual_hat/y1");
    require_same_shape(y1.shape(), x.shape(), "loss_mse: y1/x");
    double sum = 0.0;
    auto r = residual_hat.data();
    auto a = y1.data();
    auto b = x.data();
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double e = static_cast<double>(r[i]) - (static_cast<double>(a[i]) - b[i]);
        sum += e * e;
    }
    LossValue loss;
    if (r.empty()) return loss;
    loss.value = sum / (2.0 * residual_hat.n());
    loss.per_pixel = sum / static_cast<double>(r.size());
    return loss;
}

template <typename T>
Tensor<T> loss_gradient(const Tensor<T>& residual_hat, const Tensor<T>& y1, const Tensor<T>& x) {
    require_same_shape(residual_hat.shape(), y1.shape(), "loss_gradient: residual_hat/y1");
    require_same_shape(y1.shape(), x.shape(), "loss_gradient: y1/x");
    Tensor<T> g(residual_hat.shape());
    const T inv_n = T{1} / static_cast<T>(residual_hat.n());
    auto r = residual_hat.data();
    auto a = y1.data();
    auto b = x.data();
    auto out = g.data();
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = (r[i] - (a[i] - b[i])) * inv_n;
    return g;
}

template <typename T>
GradientSet<T> backward(const NetworkParams<T>& params, const ForwardCache<T>& cache,
                        const Tensor<T>& d_residual) {
    if (!cache.filled_in) throw Error("backward: forward cache is empty; run forward with a cache");
    check_params(params);
    const LayerLayout lay = layer_layout(params.config);
    const auto& L = params.layers;
    GradientSet<T> grads = GradientSet<T>::zeros_like(params);
    require_same_shape(d_residual.shape(), cache.residual.shape(), "backward: upstream");

    auto head = conv2d_backward(cache.head_in, L[lay.output], cache.residual, d_residual);
    grads.layers[lay.output] = std::move(head.params);

    // head_in = dil_out[last] (+ boost) + t1
    Tensor<T> d_t1 = head.input;
    Tensor<T> d_boost;
    if (lay.boost) d_boost = Tensor<T>(cache.boost.shape());
    Tensor<T> d_h = std::move(head.input);
    for (std::size_t k = lay.dilated.size(); k-- > 0;) {
        if (contains(lay.boost_after, k)) add_at_junction(d_boost, d_h, "boost injection (grad)");
        auto g = conv2d_backward(cache.dil_in[k], L[lay.dilated[k]], cache.dil_out[k], d_h);
        grads.layers[lay.dilated[k]] = std::move(g.params);
        d_h = std::move(g.input);
    }
    add_at_junction(d_t1, d_h, "dilated-stack input (grad)");

    if (lay.boost) {
        auto g = conv2d_backward(cache.composite, L[*lay.boost], cache.boost, d_boost, false);
        grads.layers[*lay.boost] = std::move(g.params);
    }

    // t1 = concat(ms) + t0
    Tensor<T> d_t0 = d_t1;
    int c0 = 0;
    for (std::size_t k = 0; k < lay.multiscale.size(); ++k) {
        const auto& layer = L[lay.multiscale[k]];
        Tensor<T> slice = lay.multiscale.size() == 1 ? d_t1
                                                     : slice_channels(d_t1, c0, layer.out_channels);
        c0 += layer.out_channels;
        auto g = conv2d_backward(cache.t0, layer, cache.ms[k], slice);
        grads.layers[lay.multiscale[k]] = std::move(g.params);
        add_at_junction(d_t0, g.input, "multiscale input (grad)");
    }

    const int F = params.config.fusion_channels;
    auto g1 = conv2d_backward(cache.y1, L[lay.fusion_y1], cache.f1, slice_channels(d_t0, 0, F), false);
    auto g2 = conv2d_backward(cache.y2, L[lay.fusion_y2], cache.f2, slice_channels(d_t0, F, F), false);
    grads.layers[lay.fusion_y1] = std::move(g1.params);
    grads.layers[lay.fusion_y2] = std::move(g2.params);
    return grads;
}

template <typename T>
GradientSet<T> backward(const NetworkParams<T>& params, const ForwardCache<T>& cache,
                        const Tensor<T>& y1, const Tensor<T>& x) {
    if (!cache.filled_in) throw Error("backward: forward cache is empty; run forward with a cache");
    return backward(params, cache, loss_gradient(cache.residual, y1, x));
}

template <typename T>
Tensor<T> reconstruct(const NetworkParams<T>& params, const Tensor<T>& y1, const Tensor<T>& y2,
                      const Mask& mask, ValueRange range) {
    if (!(range.lo <= range.hi)) throw ArgumentError("reconstruct: empty clamp range");
    const Tensor<T> residual = forward(params, y1, y2, mask);
    Tensor<T> out = y1;
    const auto lo = static_cast<T>(range.lo);
    const auto hi = static_cast<T>(range.hi);
    auto m = mask.values();
    for (int n = 0; n < y1.n(); ++n) {
        for (int c = 0; c < y1.c(); ++c) {
            auto dst = out.plane(n, c);
            auto r = residual.plane(n, c);
            for (std::size_t i = 0; i < dst.size(); ++i) {
                if (!m[i]) dst[i] = std::clamp(dst[i] - r[i], lo, hi);
            }
        }
    }
    return out;
}

#define STSCNN_INSTANTIATE(T)                                                                      \
    template struct NetworkParams<T>;                                                              \
    template struct GradientSet<T>;                                                                \
    template Tensor<T> forward(const NetworkParams<T>&, const Tensor<T>&, const Tensor<T>&,        \
                               const Mask&, ForwardCache<T>*);                                     \
    template LossValue loss_mse(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);             \
    template Tensor<T> loss_gradient(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);        \
    template GradientSet<T> backward(const NetworkParams<T>&, const ForwardCache<T>&,              \
                                     const Tensor<T>&);                                            \
    template GradientSet<T> backward(const NetworkParams<T>&, const ForwardCache<T>&,              \
                                     const Tensor<T>&, const Tensor<T>&);                          \
    template Tensor<T> reconstruct(const NetworkParams<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                   const Mask&, ValueRange);

STSCNN_INSTANTIATE(float)
STSCNN_INSTANTIATE(double)

#undef STSCNN_INSTANTIATE

} // namespace stscnn
