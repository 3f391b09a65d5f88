#include "stscnn/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace stscnn {

Mask::Mask(int height, int width, std::uint8_t fill) : height_(height), width_(width) {
    if (height < 0 || width < 0) throw ShapeError("Mask: negative dimension");
    values_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
                   fill ? 1 : 0);
}

Mask::Mask(int height, int width, std::vector<std::uint8_t> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (height < 0 || width < 0) throw ShapeError("Mask: negative dimension");
    if (values_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw ShapeError("Mask: value count does not match " + std::to_string(height) + "x" +
                         std::to_string(width));
    }
    for (auto v : values_) {
        if (v > 1) throw ArgumentError("Mask: values must be 0 or 1");
    }
}

std::size_t Mask::missing_count() const {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{0}));
}

double Mask::zero_coverage() const {
    if (values_.empty()) return 0.0;
    return static_cast<double>(missing_count()) / static_cast<double>(values_.size());
}

template <typename T>
Tensor<T> Mask::to_tensor() const {
    return Tensor<T>(Shape{1, 1, height_, width_}, std::vector<T>(values_.begin(), values_.end()));
}

Mask Mask::from_tensor(const Tensor4& t) {
    if (t.n() != 1 || t.c() != 1) {
        throw ShapeError("Mask::from_tensor: expected 1x1xHxW, got " + t.shape().str());
    }
    std::vector<std::uint8_t> values(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == 0.0) {
            values[i] = 0;
        } else if (t[i] == 1.0) {
            values[i] = 1;
        } else {
            throw FormatError("Mask::from_tensor: non-binary value " + std::to_string(t[i]) +
                              " at index " + std::to_string(i));
        }
    }
    return Mask(t.h(), t.w(), std::move(values));
}

void require_mask_fits(const Mask& mask, const Shape& shape, const char* what) {
    if (mask.height() != shape.h || mask.width() != shape.w) {
        throw ShapeError(std::string(what) + ": mask " + std::to_string(mask.height()) + "x" +
                         std::to_string(mask.width()) + " does not match image " + shape.str());
    }
}

Mask gen_stripe_mask(int height, int width, int period, int stripe_width, int phase) {
    if (stripe_width < 1) throw ArgumentError("gen_stripe_mask: stripe_width must be >= 1");
    if (stripe_width >= period) throw ArgumentError("gen_stripe_mask: stripe_width must be < period");
    if (period > height) throw ArgumentError("gen_stripe_mask: period must be <= height");
    if (width < 1) throw ArgumentError("gen_stripe_mask: width must be >= 1");
    Mask mask(height, width);
    for (int r = 0; r < height; ++r) {
        const int k = ((r - phase) % period + period) % period;
        if (k < stripe_width) {
            for (int c = 0; c < width; ++c) mask.set(r, c, false);
        }
    }
    return mask;
}

Mask gen_slcoff_mask(int height, int width, const SlcOffParams& p) {
    if (height < 1 || width < 1) throw ArgumentError("gen_slcoff_mask: empty scene");
    if (p.max_gap < 1) throw ArgumentError("gen_slcoff_mask: max_gap must be >= 1");
    if (p.center_band < 0) throw ArgumentError("gen_slcoff_mask: center_band must be >= 0");
    if (p.period <= p.max_gap) throw ArgumentError("gen_slcoff_mask: period must exceed max_gap");
    const double center = (width - 1) / 2.0;
    const double half = center;
    if (half - p.center_band <= 0.0) {
        throw ArgumentError("gen_slcoff_mask: center_band leaves no room for gaps");
    }
    const double slope = std::tan(p.angle_deg * std::numbers::pi / 180.0);
    Mask mask(height, width);
    for (int c = 0; c < width; ++c) {
        const double dist = std::abs(c - center);
        if (dist <= p.center_band) continue;
        const double t = (dist - p.center_band) / (half - p.center_band);
        const auto gap = static_cast<int>(std::lround(p.max_gap * t));
        if (gap == 0) continue;
        const double offset = slope * (c - center);
        for (int r = 0; r < height; ++r) {
            const long long s = static_cast<long long>(std::floor(r + offset)) - p.phase;
            const long long k = ((s % p.period) + p.period) % p.period;
            if (k < gap) mask.set(r, c, false);
        }
    }
    const double cov = mask.zero_coverage();
    if (cov <= 0.0 || cov >= 1.0) throw ArgumentError("gen_slcoff_mask: degenerate geometry");
    return mask;
}

namespace {

// One horizontal then vertical running-mean pass with edge clamping.
void box_blur(std::vector<double>& field, int height, int width, int radius) {
    std::vector<double> tmp(field.size());
    const double norm = 1.0 / (2 * radius + 1);
    for (int y = 0; y < height; ++y) {
        const double* row = field.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += row[std::clamp(x + k, 0, width - 1)];
            tmp[static_cast<std::size_t>(y) * width + x] = acc * norm;
        }
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += tmp[static_cast<std::size_t>(std::clamp(y + k, 0, height - 1)) * width + x];
            }
            field[static_cast<std::size_t>(y) * width + x] = acc * norm;
        }
    }
}

} // namespace

Mask gen_cloud_mask(int height, int width, double target_coverage, double smoothness,
                    std::uint64_t seed) {
    if (!(target_coverage > 0.0 && target_coverage < 0.5)) {
        throw ArgumentError("gen_cloud_mask: target_coverage must lie in (0, 0.5)");
    }
    if (!(smoothness >= 0.0)) throw ArgumentError("gen_cloud_mask: smoothness must be >= 0");
    if (height < 1 || width < 1) throw ArgumentError("gen_cloud_mask: empty scene");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> field(static_cast<std::size_t>(height) * width);
    for (auto& v : field) v = noise(rng);
    const int radius = std::max(1, static_cast<int>(std::lround(smoothness)));
    for (int pass = 0; pass < 3; ++pass) box_blur(field, height, width, radius);

    auto coverage_above = [&](double thr) {
        const auto n = std::count_if(field.begin(), field.end(), [thr](double v) { return v > thr; });
        return static_cast<double>(n) / static_cast<double>(field.size());
    };

    // Coverage is non-increasing in the threshold; bisect.
    double lo = *std::min_element(field.begin(), field.end());
    double hi = *std::max_element(field.begin(), field.end());
    double best = hi;
    double best_err = std::abs(coverage_above(hi) - target_coverage);
    for (int it = 0; it < 20; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double cov = coverage_above(mid);
        const double err = std::abs(cov - target_coverage);
        if (err < best_err) {
            best = mid;
            best_err = err;
        }
        if (cov > target_coverage) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (best_err > 0.01) {
        throw NumericError("gen_cloud_mask: could not reach coverage " +
                           std::to_string(target_coverage) + " within 0.01");
    }
    Mask mask(height, width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (field[static_cast<std::size_t>(y) * width + x] > best) mask.set(y, x, false);
        }
    }
    return mask;
}

Mask combine_masks(const Mask& a, const Mask& b) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw ShapeError("combine_masks: dimension mismatch");
    }
    std::vector<std::uint8_t> out(a.size());
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] & vb[i];
    return Mask(a.height(), a.width(), std::move(out));
}

template <typename T>
Tensor<T> apply_mask(const Tensor<T>& x, const Mask& mask, T fill) {
    require_mask_fits(mask, x.shape(), "apply_mask");
    Tensor<T> out = x;
    auto m = mask.values();
    for (int n = 0; n < x.n(); ++n) {
        for (int c = 0; c < x.c(); ++c) {
            auto p = out.plane(n, c);
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (!m[i]) p[i] = fill;
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> shift_image(const Tensor<T>& x, int dx, int dy) {
    Tensor<T> out(x.shape());
    const int H = x.h();
    const int W = x.w();
    for (int n = 0; n < x.n(); ++n) {
        for (int c = 0; c < x.c(); ++c) {
            for (int y = 0; y < H; ++y) {
                const int sy = std::clamp(y - dy, 0, H - 1);
                for (int xx = 0; xx < W; ++xx) {
                    out(n, c, y, xx) = x(n, c, sy, std::clamp(xx - dx, 0, W - 1));
                }
            }
        }
    }
    return out;
}

template Tensor<float> Mask::to_tensor<float>() const;
template Tensor<double> Mask::to_tensor<double>() const;
template Tensor<float> apply_mask(const Tensor<float>&, const Mask&, float);
template Tensor<double> apply_mask(const Tensor<double>&, const Mask&, double);
template Tensor<float> shift_image(const Tensor<float>&, int, int);
template Tensor<double> shift_image(const Tensor<double>&, int, int);

} // namespace stscnn
