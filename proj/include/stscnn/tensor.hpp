#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stscnn/error.hpp"

namespace stscnn {

/// Dimensions of a dense (batch, channel, height, width) array.
struct Shape {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t size() const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) *
               static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
    std::size_t plane() const { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
    bool same_spatial(const Shape& o) const { return h == o.h && w == o.w; }

    bool operator==(const Shape&) const = default;
    std::string str() const;
};

/// Dense row-major 4-D tensor. Element (n, c, y, x) lives at
/// ((n * C + c) * H + y) * W + x.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T{0});
    Tensor(Shape shape, std::vector<T> values);

    static Tensor zeros(int n, int c, int h, int w) { return Tensor(Shape{n, c, h, w}); }

    const Shape& shape() const { return shape_; }
    int n() const { return shape_.n; }
    int c() const { return shape_.c; }
    int h() const { return shape_.h; }
    int w() const { return shape_.w; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }
    T* raw() { return data_.data(); }
    const T* raw() const { return data_.data(); }

    std::size_t offset(int n, int c, int y, int x) const {
        return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
    }
    T& operator()(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
    const T& operator()(int n, int c, int y, int x) const { return data_[offset(n, c, y, x)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    /// One H*W plane of sample n, channel c.
    std::span<T> plane(int n, int c) { return {data_.data() + offset(n, c, 0, 0), shape_.plane()}; }
    std::span<const T> plane(int n, int c) const {
        return {data_.data() + offset(n, c, 0, 0), shape_.plane()};
    }

    void fill(T v);
    bool all_finite() const;

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.begin(), data_.end());
        return Tensor<U>(shape_, std::move(out));
    }

    bool operator==(const Tensor&) const = default;

private:
    Shape shape_{};
    std::vector<T> data_;
};

using Tensor4 = Tensor<double>;
using Tensor4f = Tensor<float>;

/// Throws ShapeError naming `what` unless a and b have identical shapes.
void require_same_shape(const Shape& a, const Shape& b, const std::string& what);

extern template class Tensor<float>;
extern template class Tensor<double>;

} // namespace stscnn
