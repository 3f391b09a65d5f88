#include "stscnn/ops.hpp"

#include <algorithm>

namespace stscnn {

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    Tensor<T> out(x.shape());
    auto src = x.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > T{0} ? src[i] : T{0};
    return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& upstream) {
    require_same_shape(x.shape(), upstream.shape(), "relu_backward");
    Tensor<T> out(x.shape());
    auto xs = x.data();
    auto up = upstream.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < xs.size(); ++i) dst[i] = xs[i] > T{0} ? up[i] : T{0};
    return out;
}

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts) {
    if (parts.empty()) throw ShapeError("concat_channels: no parts");
    const Shape& first = parts.front().shape();
    int channels = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Shape& s = parts[k].shape();
        if (s.n != first.n || s.h != first.h || s.w != first.w) {
            throw ShapeError("concat_channels: part " + std::to_string(k) + " shape " + s.str() +
                             " incompatible with " + first.str());
        }
        channels += s.c;
    }
    Tensor<T> out(Shape{first.n, channels, first.h, first.w});
    for (int n = 0; n < first.n; ++n) {
        int c0 = 0;
        for (const auto& p : parts) {
            for (int c = 0; c < p.c(); ++c) {
                auto src = p.plane(n, c);
                std::copy(src.begin(), src.end(), out.plane(n, c0 + c).begin());
            }
            c0 += p.c();
        }
    }
    return out;
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, int first, int count) {
    if (first < 0 || count < 0 || first + count > x.c()) {
        throw ShapeError("slice_channels: range [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") outside " + x.shape().str());
    }
    Tensor<T> out(Shape{x.n(), count, x.h(), x.w()});
    for (int n = 0; n < x.n(); ++n) {
        for (int c = 0; c < count; ++c) {
            auto src = x.plane(n, first + c);
            std::copy(src.begin(), src.end(), out.plane(n, c).begin());
        }
    }
    return out;
}

namespace {

template <typename T>
T apply(ElementwiseOp op, T a, T b) {
    switch (op) {
    case ElementwiseOp::add: return a + b;
    case ElementwiseOp::sub: return a - b;
    case ElementwiseOp::mul: return a * b;
    }
    return a;
}

} // namespace

template <typename T>
Tensor<T> elementwise(ElementwiseOp op, const Tensor<T>& a, const Tensor<T>& b) {
    Tensor<T> out(a.shape());
    if (a.shape() == b.shape()) {
        auto pa = a.data();
        auto pb = b.data();
        auto po = out.data();
        for (std::size_t i = 0; i < pa.size(); ++i) po[i] = apply(op, pa[i], pb[i]);
        return out;
    }
    if (b.c() == 1 && b.n() == a.n() && a.shape().same_spatial(b.shape())) {
        for (int n = 0; n < a.n(); ++n) {
            auto pb = b.plane(n, 0);
            for (int c = 0; c < a.c(); ++c) {
                auto pa = a.plane(n, c);
                auto po = out.plane(n, c);
                for (std::size_t i = 0; i < pa.size(); ++i) po[i] = apply(op, pa[i], pb[i]);
            }
        }
        return out;
    }
    throw ShapeError("elementwise: shapes " + a.shape().str() + " and " + b.shape().str() +
                     " are neither equal nor channel-broadcastable");
}

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a.shape(), b.shape(), "add_inplace");
    auto pa = a.data();
    auto pb = b.data();
    for (std::size_t i = 0; i < pa.size(); ++i) pa[i] += pb[i];
}

#define STSCNN_INSTANTIATE(T)                                                                      \
    template Tensor<T> relu(const Tensor<T>&);                                                     \
    template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                          \
    template Tensor<T> concat_channels(std::span<const Tensor<T>>);                                \
    template Tensor<T> slice_channels(const Tensor<T>&, int, int);                                 \
    template Tensor<T> elementwise(ElementwiseOp, const Tensor<T>&, const Tensor<T>&);             \
    template void add_inplace(Tensor<T>&, const Tensor<T>&);

STSCNN_INSTANTIATE(float)
STSCNN_INSTANTIATE(double)

#undef STSCNN_INSTANTIATE

} // namespace stscnn
