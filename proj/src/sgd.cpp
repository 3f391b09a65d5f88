#include "stscnn/sgd.hpp"

#include <cmath>

namespace stscnn {

template <typename T>
Velocity<T> zero_velocity(std::span<const ConvLayer<T>> layers) {
    Velocity<T> v;
    v.reserve(layers.size());
    for (const auto& l : layers) v.push_back(ParamGrad<T>::zeros_like(l));
    return v;
}

namespace {

template <typename T>
bool finite(const std::vector<T>& values) {
    for (T v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

template <typename T>
void update(std::vector<T>& w, const std::vector<T>& g, std::vector<T>& v, T lr, T momentum) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = momentum * v[i] - lr * g[i];
        w[i] = w[i] + v[i];
    }
}

} // namespace

template <typename T>
void sgd_step(std::span<ConvLayer<T>> layers, std::span<const ParamGrad<T>> grads, T lr,
              T momentum, Velocity<T>& velocity) {
    if (!(lr > T{0})) throw ArgumentError("sgd_step: learning rate must be > 0");
    if (!(momentum >= T{0} && momentum < T{1})) {
        throw ArgumentError("sgd_step: momentum must lie in [0, 1)");
    }
    if (grads.size() != layers.size() || velocity.size() != layers.size()) {
        throw ShapeError("sgd_step: parameter, gradient and velocity layer counts differ");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        if (grads[k].weights.size() != l.weights.size() || grads[k].biases.size() != l.biases.size() ||
            velocity[k].weights.size() != l.weights.size() ||
            velocity[k].biases.size() != l.biases.size()) {
            throw ShapeError("sgd_step: gradient/velocity shape mismatch at layer '" + l.name + "'");
        }
        if (!finite(grads[k].weights) || !finite(grads[k].biases)) {
            throw NumericError("sgd_step: non-finite gradient in layer '" + l.name + "'");
        }
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        update(layers[k].weights, grads[k].weights, velocity[k].weights, lr, momentum);
        update(layers[k].biases, grads[k].biases, velocity[k].biases, lr, momentum);
    }
}

template Velocity<float> zero_velocity(std::span<const ConvLayer<float>>);
template Velocity<double> zero_velocity(std::span<const ConvLayer<double>>);
template void sgd_step(std::span<ConvLayer<float>>, std::span<const ParamGrad<float>>, float, float,
                       Velocity<float>&);
template void sgd_step(std::span<ConvLayer<double>>, std::span<const ParamGrad<double>>, double,
                       double, Velocity<double>&);

} // namespace stscnn
