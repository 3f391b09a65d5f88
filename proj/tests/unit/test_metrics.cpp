#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stscnn/metrics.hpp"
#include "support/naive_metrics.hpp"
#include "support/reference.hpp"

using namespace stscnn;
using stscnn::testing::random_tensor;

namespace {

Mask random_gaps(int h, int w, std::mt19937_64& rng) {
    std::bernoulli_distribution missing(0.4);
    Mask m(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) m.set(y, x, !missing(rng));
    }
    return m;
}

} // namespace

TEST(Psnr, IdenticalIsInfinite) {
    std::mt19937_64 rng(1);
    const Tensor4 x = random_tensor(Shape{1, 2, 8, 8}, rng, 0.0, 1.0);
    EXPECT_TRUE(std::isinf(psnr(x, x, 0, 1.0)));
    EXPECT_GT(psnr(x, x, 1, 1.0), 0.0);
}

TEST(Psnr, UnitMseAtPeak255) {
    Tensor4 x(Shape{1, 1, 4, 4}, 100.0);
    Tensor4 y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += (i % 2 ? 1.0 : -1.0);
    EXPECT_NEAR(psnr(x, y, 0, 255.0), 48.1308, 1e-4);
}

TEST(Psnr, HalvingMseAddsThreeDecibels) {
    Tensor4 x(Shape{1, 1, 2, 2});
    Tensor4 y(Shape{1, 1, 2, 2}, {0.2, 0.2, 0.2, 0.2});
    Tensor4 z(Shape{1, 1, 2, 2}, {0.2, 0.2, 0.0, 0.0});
    EXPECT_NEAR(psnr(x, z, 0, 1.0) - psnr(x, y, 0, 1.0), 10.0 * std::log10(2.0), 1e-12);
}

TEST(Psnr, DecreasesWithNoiseScale) {
    std::mt19937_64 rng(2);
    const Tensor4 x = random_tensor(Shape{1, 1, 16, 16}, rng, 0.0, 1.0);
    const Tensor4 noise = random_tensor(x.shape(), rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double scale : {0.001, 0.003, 0.01, 0.05, 0.2}) {
        Tensor4 y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += scale * noise[i];
        const double p = psnr(x, y, 0, 1.0);
        EXPECT_LT(p, prev);
        prev = p;
    }
}

TEST(Psnr, EmptyScopeThrows) {
    const Tensor4 x(Shape{1, 1, 4, 4});
    const Mask all_valid(4, 4);
    EXPECT_THROW(psnr(x, x, 0, 1.0, &all_valid), ArgumentError);
}

TEST(Ssim, IdenticalIsExactlyOne) {
    std::mt19937_64 rng(3);
    const Tensor4 x = random_tensor(Shape{1, 1, 24, 20}, rng, 0.0, 1.0);
    EXPECT_EQ(ssim(x, x, 0, 1.0), 1.0);
}

TEST(Ssim, InversionScoresBelowOne) {
    std::mt19937_64 rng(4);
    const Tensor4 x = random_tensor(Shape{1, 1, 20, 20}, rng, 0.0, 1.0);
    Tensor4 inv = x;
    for (auto& v : inv.data()) v = 1.0 - v;
    EXPECT_LT(ssim(x, inv, 0, 1.0), 1.0);
}

TEST(Ssim, SymmetricAndTooSmallThrows) {
    std::mt19937_64 rng(5);
    const Tensor4 x = random_tensor(Shape{1, 1, 18, 18}, rng, 0.0, 1.0);
    const Tensor4 y = random_tensor(Shape{1, 1, 18, 18}, rng, 0.0, 1.0);
    EXPECT_NEAR(ssim(x, y, 0, 1.0), ssim(y, x, 0, 1.0), 1e-12);
    EXPECT_THROW(ssim(Tensor4(Shape{1, 1, 10, 30}), Tensor4(Shape{1, 1, 10, 30}), 0, 1.0), ShapeError);
}

TEST(Cc, ClosedForms) {
    std::mt19937_64 rng(6);
    const Tensor4 x = random_tensor(Shape{1, 2, 6, 6}, rng, 0.0, 1.0);
    Tensor4 neg = x, aff = x;
    for (auto& v : neg.data()) v = 0.7 - v;
    for (auto& v : aff.data()) v = 2.0 * v + 3.0;
    EXPECT_NEAR(cc(x, x), 1.0, 1e-15);
    EXPECT_NEAR(cc(x, neg), -1.0, 1e-15);
    EXPECT_NEAR(cc(x, aff, 1), 1.0, 1e-15);
    EXPECT_THROW(cc(x, Tensor4(x.shape(), 0.5)), NumericError);
}

TEST(Sam, ClosedForms) {
    std::mt19937_64 rng(7);
    const Tensor4 x = random_tensor(Shape{1, 3, 5, 5}, rng, 0.1, 1.0);
    Tensor4 scaled = x;
    for (auto& v : scaled.data()) v *= 3.0;
    EXPECT_EQ(sam(x, x).degrees, 0.0);
    EXPECT_NEAR(sam(x, scaled).degrees, 0.0, 1e-6);

    Tensor4 e1(Shape{1, 2, 3, 3}), e2(Shape{1, 2, 3, 3});
    for (auto& v : e1.plane(0, 0)) v = 1.0;
    for (auto& v : e2.plane(0, 1)) v = 1.0;
    EXPECT_EQ(sam(e1, e2).degrees, 90.0);
}

TEST(Sam, PerPixelScalingInvariance) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> k(0.1, 10.0);
    const Tensor4 x = random_tensor(Shape{1, 4, 6, 7}, rng, 0.0, 1.0);
    const Tensor4 y = random_tensor(x.shape(), rng, 0.0, 1.0);
    Tensor4 ys = y;
    for (int r = 0; r < 6; ++r) {
        for (int q = 0; q < 7; ++q) {
            const double s = k(rng);
            for (int c = 0; c < 4; ++c) ys(0, c, r, q) *= s;
        }
    }
    EXPECT_NEAR(sam(x, y).degrees, sam(x, ys).degrees, 1e-9);
}

TEST(Sam, ZeroVectorsSkippedAndCounted) {
    std::mt19937_64 rng(9);
    Tensor4 x = random_tensor(Shape{1, 2, 4, 4}, rng, 0.1, 1.0);
    x(0, 0, 1, 1) = 0.0;
    x(0, 1, 1, 1) = 0.0;
    EXPECT_EQ(sam(x, x).skipped, 1u);
    EXPECT_THROW(sam(Tensor4(Shape{1, 2, 2, 2}), Tensor4(Shape{1, 2, 2, 2})), ArgumentError);
    EXPECT_THROW(sam(Tensor4(Shape{1, 1, 2, 2}), Tensor4(Shape{1, 1, 2, 2})), ArgumentError);
}

TEST(MetricOracles, TwentyRandomPairsFullAndGapScopes) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(12, 32);
    for (int trial = 0; trial < 20; ++trial) {
        const Shape s{1, 3, dim(rng), dim(rng)};
        const Tensor4 x = random_tensor(s, rng, 0.0, 1.0);
        const Tensor4 y = random_tensor(s, rng, 0.0, 1.0);
        const Mask gaps = random_gaps(s.h, s.w, rng);
        for (const Mask* m : {static_cast<const Mask*>(nullptr), &gaps}) {
            for (int b = 0; b < 3; ++b) {
                EXPECT_NEAR(psnr(x, y, b, 1.0, m), stscnn::testing::naive_psnr(x, y, b, 1.0, m), 1e-9);
                EXPECT_NEAR(ssim(x, y, b, 1.0, m), stscnn::testing::naive_ssim(x, y, b, 1.0, m), 1e-9);
                EXPECT_NEAR(cc(x, y, b, m), stscnn::testing::naive_cc(x, y, b, m), 1e-9);
            }
            EXPECT_NEAR(cc(x, y, -1, m), stscnn::testing::naive_cc(x, y, -1, m), 1e-9);
            EXPECT_NEAR(sam(x, y, m).degrees, stscnn::testing::naive_sam(x, y, m), 1e-9);
        }
    }
}

TEST(MetricsReport, MeansAndScopes) {
    std::mt19937_64 rng(10);
    const Tensor4 x = random_tensor(Shape{1, 2, 16, 16}, rng, 0.0, 1.0);
    Tensor4 y = x;
    for (auto& v : y.data()) v += 0.01;
    const Mask gaps = gen_stripe_mask(16, 16);
    const MetricsReport full = evaluate_metrics(x, y, 1.0, MetricScope::full);
    EXPECT_EQ(full.bands.size(), 2u);
    EXPECT_NEAR(full.mpsnr, 0.5 * (full.bands[0].psnr + full.bands[1].psnr), 1e-12);
    EXPECT_NEAR(full.mpsnr, 40.0, 1e-9);
    EXPECT_THROW(evaluate_metrics(x, y, 1.0, MetricScope::gap_only), ArgumentError);
    const MetricsReport gap = evaluate_metrics(x, y, 1.0, MetricScope::gap_only, &gaps);
    EXPECT_EQ(gap.scope, MetricScope::gap_only);

    const Mask none(16, 16, 0);
    const MetricsReport all_gap = evaluate_metrics(x, y, 1.0, MetricScope::gap_only, &none);
    EXPECT_EQ(all_gap.mpsnr, full.mpsnr);
    EXPECT_EQ(all_gap.mssim, full.mssim);
    EXPECT_EQ(all_gap.cc_all, full.cc_all);
    EXPECT_EQ(all_gap.sam_mean, full.sam_mean);
}

TEST(MetricsReport, FlatEstimateGivesNanCorrelation) {
    std::mt19937_64 rng(11);
    const Tensor4 x = random_tensor(Shape{1, 2, 12, 12}, rng, 0.0, 1.0);
    const MetricsReport r = evaluate_metrics(x, Tensor4(x.shape(), 0.5), 1.0, MetricScope::full);
    EXPECT_TRUE(std::isnan(r.cc_all));
    EXPECT_TRUE(std::isfinite(r.mpsnr));
}
