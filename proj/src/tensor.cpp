#include "stscnn/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace stscnn {

std::string Shape::str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
}

namespace {

void check_dims(const Shape& s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
        throw ShapeError("negative tensor dimension in " + s.str());
    }
}

} // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(shape) {
    check_dims(shape);
    data_.assign(shape.size(), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : shape_(shape), data_(std::move(values)) {
    check_dims(shape);
    if (data_.size() != shape.size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match dims " + shape.str());
    }
}

template <typename T>
void Tensor<T>::fill(T v) {
    std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
bool Tensor<T>::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

void require_same_shape(const Shape& a, const Shape& b, const std::string& what) {
    if (a == b) return;
    const char* names[] = {"batch", "channel", "height", "width"};
    const int da[] = {a.n, a.c, a.h, a.w};
    const int db[] = {b.n, b.c, b.h, b.w};
    for (int i = 0; i < 4; ++i) {
        if (da[i] != db[i]) {
            throw ShapeError(what + ": " + names[i] + " mismatch " + a.str() + " vs " + b.str());
        }
    }
}

template class Tensor<float>;
template class Tensor<double>;

} // namespace stscnn
