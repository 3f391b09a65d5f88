#include "stscnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stscnn {

std::string to_string(Relation relation) {
    return relation == Relation::affine ? "affine" : "nonlinear";
}

Relation relation_from_string(const std::string& name) {
    if (name == "affine") return Relation::affine;
    if (name == "nonlinear") return Relation::nonlinear;
    throw ArgumentError("unknown relation '" + name + "' (expected affine or nonlinear)");
}

namespace {

// Sliding-window mean along rows then columns, edges clamped.
void blur(std::vector<double>& f, int h, int w, int radius) {
    std::vector<double> tmp(f.size());
    const double norm = 1.0 / (2 * radius + 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += f[static_cast<std::size_t>(y) * w + std::clamp(x + k, 0, w - 1)];
            tmp[static_cast<std::size_t>(y) * w + x] = acc * norm;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
            f[static_cast<std::size_t>(y) * w + x] = acc * norm;
        }
    }
}

std::vector<double> smooth_field(int h, int w, int radius, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> f(static_cast<std::size_t>(h) * w);
    for (auto& v : f) v = noise(rng);
    for (int pass = 0; pass < 3; ++pass) blur(f, h, w, radius);
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= static_cast<double>(f.size());
    double var = 0.0;
    for (double v : f) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(f.size()));
    for (auto& v : f) v = sd > 0.0 ? (v - mean) / sd : 0.0;
    return f;
}

} // namespace

SyntheticScene synth_scene(int bands, int height, int width, std::uint64_t seed, Relation relation) {
    if (bands < 2) throw ArgumentError("synth_scene: needs at least two bands");
    if (height < 1 || width < 1) throw ArgumentError("synth_scene: empty scene");

    std::mt19937_64 rng(seed);
    const int radii[] = {2, 6, 16};
    std::vector<std::vector<double>> latent;
    for (int r : radii) latent.push_back(smooth_field(height, width, r, rng));

    std::uniform_real_distribution<double> mix(-1.0, 1.0);
    std::uniform_real_distribution<double> gain(0.8, 1.1);
    std::uniform_real_distribution<double> offset(-0.05, 0.1);
    std::uniform_real_distribution<double> curve(0.2, 0.5);
    std::bernoulli_distribution flip(0.5);

    SyntheticScene scene;
    const Shape shape{1, bands, height, width};
    scene.x = Tensor4(shape);
    scene.y2 = Tensor4(shape);
    const std::size_t n = shape.plane();
    for (int b = 0; b < bands; ++b) {
        // Coarse structure is shared by every band; finer scales vary per band.
        const double wts[] = {0.6 * mix(rng), 0.8 + 0.2 * mix(rng), 0.6 * mix(rng)};
        std::vector<double> v(n, 0.0);
        for (std::size_t k = 0; k < latent.size(); ++k) {
            for (std::size_t i = 0; i < n; ++i) v[i] += wts[k] * latent[k][i];
        }
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double span = *hi - *lo > 0.0 ? *hi - *lo : 1.0;
        const double vlo = *lo;
        auto px = scene.x.plane(0, b);
        for (std::size_t i = 0; i < n; ++i) px[i] = 0.05 + 0.9 * (v[i] - vlo) / span;

        const double a = gain(rng);
        const double c = offset(rng);
        scene.gain.push_back(a);
        scene.offset.push_back(c);
        auto py = scene.y2.plane(0, b);
        if (relation == Relation::affine) {
            scene.curvature.push_back(0.0);
            for (std::size_t i = 0; i < n; ++i) py[i] = a * px[i] + c;
        } else {
            const double q = flip(rng) ? curve(rng) : -curve(rng);
            scene.curvature.push_back(q);
            const auto texture = smooth_field(height, width, 1, rng);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = px[i] - 0.5;
                py[i] = a * px[i] + c + q * d * d + 0.04 * texture[i];
            }
        }
    }
    return scene;
}

} // namespace stscnn
