#include <gtest/gtest.h>

#include <random>

#include "stscnn/baselines.hpp"
#include "stscnn/metrics.hpp"
#include "support/reference.hpp"

using namespace stscnn;
using stscnn::testing::random_tensor;

namespace {

Mask random_mask(int h, int w, std::mt19937_64& rng) {
    std::bernoulli_distribution missing(0.3);
    Mask m(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) m.set(y, x, !missing(rng));
    }
    return m;
}

} // namespace

TEST(LfFit, ExactAffineRelation) {
    std::mt19937_64 rng(1);
    const Tensor4 y2 = random_tensor(Shape{1, 1, 10, 10}, rng, 0.0, 1.0);
    Tensor4 x = y2;
    for (auto& v : x.data()) v = 2.0 * v + 1.0;
    const Mask m = random_mask(10, 10, rng);
    const LinearFit fit = lf_fit(y2, apply_mask(x, m), 0, m);
    EXPECT_NEAR(fit.slope(), 2.0, 1e-10);
    EXPECT_NEAR(fit.intercept(), 1.0, 1e-10);

    const LinearFit id = lf_fit(y2, y2, 0, m);
    EXPECT_NEAR(id.slope(), 1.0, 1e-12);
    EXPECT_NEAR(id.intercept(), 0.0, 1e-12);
    EXPECT_NEAR(id.rms, 0.0, 1e-12);
}

TEST(LfFit, NoisySlopeWithinOnePercent) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> noise(0.0, 0.01);
    const Tensor4 y2 = random_tensor(Shape{1, 1, 100, 100}, rng, 0.0, 1.0);
    Tensor4 x = y2;
    for (auto& v : x.data()) v = 2.0 * v + 1.0 + noise(rng);
    const LinearFit fit = lf_fit(y2, x, 0, Mask(100, 100));
    EXPECT_GE(fit.slope(), 1.99);
    EXPECT_LE(fit.slope(), 2.01);
    EXPECT_NEAR(fit.rms, 0.01, 0.001);
}

TEST(LfFit, DegenerateInputsThrow) {
    const Tensor4 flat(Shape{1, 1, 4, 4}, 0.3);
    std::mt19937_64 rng(3);
    const Tensor4 x = random_tensor(flat.shape(), rng);
    EXPECT_THROW(lf_fit(flat, x, 0, Mask(4, 4)), ArgumentError);
    Mask one(4, 4, 0);
    one.set(0, 0, true);
    EXPECT_THROW(lf_fit(x, x, 0, one), ArgumentError);
    EXPECT_THROW(lf_fit(x, x, 1, Mask(4, 4)), ArgumentError);
}

TEST(LfFit, QuadraticDegreeRecoversCurve) {
    std::mt19937_64 rng(4);
    const Tensor4 y2 = random_tensor(Shape{1, 1, 12, 12}, rng, 0.0, 1.0);
    Tensor4 x = y2;
    for (auto& v : x.data()) v = 0.5 - v + 3.0 * v * v;
    const LinearFit fit = lf_fit(y2, x, 0, Mask(12, 12), 2);
    ASSERT_EQ(fit.coeffs.size(), 3u);
    EXPECT_NEAR(fit.coeffs[0], 0.5, 1e-9);
    EXPECT_NEAR(fit.coeffs[1], -1.0, 1e-9);
    EXPECT_NEAR(fit.coeffs[2], 3.0, 1e-9);
}

TEST(LfReconstruct, ExactInAffineWorld) {
    std::mt19937_64 rng(5);
    const Tensor4 y2 = random_tensor(Shape{1, 3, 9, 9}, rng, 0.0, 1.0);
    Tensor4 x = y2;
    for (int b = 0; b < 3; ++b) {
        for (auto& v : x.plane(0, b)) v = (0.5 + b) * v - 0.1 * b;
    }
    const Mask m = random_mask(9, 9, rng);
    const Tensor4 xhat = lf_reconstruct(apply_mask(x, m), y2, m);
    EXPECT_LE(stscnn::testing::max_abs_diff(xhat, x), 1e-12);
    EXPECT_EQ(lf_reconstruct(x, y2, Mask(9, 9)), x);
}

TEST(LfReconstruct, NonlinearWorldGivesFiniteFloor) {
    std::mt19937_64 rng(6);
    const Tensor4 y2 = random_tensor(Shape{1, 2, 20, 20}, rng, 0.0, 1.0);
    Tensor4 x = y2;
    for (auto& v : x.data()) v = v * v;
    const Mask m = gen_stripe_mask(20, 20);
    const Tensor4 xhat = lf_reconstruct(apply_mask(x, m), y2, m);
    const double p = psnr(x, xhat, 0, 1.0, &m);
    EXPECT_TRUE(std::isfinite(p));
    EXPECT_GT(p, 10.0);
}

TEST(CopyFill, Contract) {
    std::mt19937_64 rng(7);
    const Tensor4 x = random_tensor(Shape{1, 2, 8, 8}, rng, 0.0, 1.0);
    const Mask m = random_mask(8, 8, rng);
    const Tensor4 y1 = apply_mask(x, m);
    EXPECT_EQ(copy_fill(y1, x, m), x);
    EXPECT_EQ(copy_fill(x, random_tensor(x.shape(), rng), Mask(8, 8)), x);

    Tensor4 offset = x;
    for (auto& v : offset.data()) v += 0.1;
    const Tensor4 xhat = copy_fill(y1, offset, m);
    double sum = 0.0;
    int n = 0;
    for (int b = 0; b < 2; ++b) {
        for (int r = 0; r < 8; ++r) {
            for (int q = 0; q < 8; ++q) {
                if (m.valid(r, q)) continue;
                const double d = xhat(0, b, r, q) - x(0, b, r, q);
                sum += d * d;
                ++n;
            }
        }
    }
    EXPECT_NEAR(sum / n, 0.01, 1e-15);
}

TEST(Baselines, ValidPixelsUntouched) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor4 y1 = random_tensor(Shape{1, 2, 7, 9}, rng);
        const Tensor4 y2 = random_tensor(y1.shape(), rng);
        const Mask m = random_mask(7, 9, rng);
        for (const Tensor4& xhat : {lf_reconstruct(y1, y2, m), copy_fill(y1, y2, m)}) {
            for (int b = 0; b < 2; ++b) {
                for (int r = 0; r < 7; ++r) {
                    for (int q = 0; q < 9; ++q) {
                        if (m.valid(r, q)) EXPECT_EQ(xhat(0, b, r, q), y1(0, b, r, q));
                    }
                }
            }
        }
    }
}
