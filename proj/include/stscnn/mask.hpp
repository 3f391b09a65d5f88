#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stscnn/tensor.hpp"

namespace stscnn {

/// Binary validity raster: 1 = observed pixel, 0 = missing.
class Mask {
public:
    Mask() = default;
    Mask(int height, int width, std::uint8_t fill = 1);
    Mask(int height, int width, std::vector<std::uint8_t> values);

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return values_.size(); }

    bool valid(int y, int x) const { return values_[index(y, x)] != 0; }
    std::uint8_t operator()(int y, int x) const { return values_[index(y, x)]; }
    void set(int y, int x, bool valid) { values_[index(y, x)] = valid ? 1 : 0; }

    std::span<const std::uint8_t> values() const { return values_; }

    std::size_t missing_count() const;
    /// Fraction of pixels marked missing.
    double zero_coverage() const;

    /// 1 x 1 x H x W tensor of 0/1 values.
    template <typename T>
    Tensor<T> to_tensor() const;

    /// Accepts a single-channel, single-sample tensor holding only 0 and 1.
    static Mask from_tensor(const Tensor4& t);

    bool operator==(const Mask&) const = default;

private:
    std::size_t index(int y, int x) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> values_;
};

/// Horizontal dead-detector lines: row r is missing when
/// (r - phase) mod period < stripe_width.
Mask gen_stripe_mask(int height, int width, int period = 4, int stripe_width = 1, int phase = 0);

struct SlcOffParams {
    int center_band = 0;     // half-width of the fully valid column band around the centre
    int max_gap = 10;        // gap height at the left/right scene edges
    int period = 33;         // rows between gap stripes
    double angle_deg = 8.0;  // slant of the stripes
    int phase = 0;
};

/// Wedge-shaped SLC-off gaps: slanted periodic stripes whose height grows
/// linearly from 0 at the vertical centreline to max_gap at the edges.
Mask gen_slcoff_mask(int height, int width, const SlcOffParams& params = {});

/// Smoothed random field thresholded to the requested missing fraction.
/// `smoothness` is the box-filter radius (three passes).
Mask gen_cloud_mask(int height, int width, double target_coverage, double smoothness,
                    std::uint64_t seed);

/// Valid only where both masks are valid.
Mask combine_masks(const Mask& a, const Mask& b);

/// x where valid, `fill` in every band where missing.
template <typename T>
Tensor<T> apply_mask(const Tensor<T>& x, const Mask& mask, T fill = T{0});

/// Integer translation by (dx, dy) with edge replication:
/// out(y, x) = in(clamp(y - dy), clamp(x - dx)).
template <typename T>
Tensor<T> shift_image(const Tensor<T>& x, int dx, int dy);

/// Throws ShapeError unless the mask matches the tensor's H and W.
void require_mask_fits(const Mask& mask, const Shape& shape, const char* what);

} // namespace stscnn
