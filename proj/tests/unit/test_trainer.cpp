#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "stscnn/checkpoint.hpp"
#include "stscnn/trainer.hpp"
#include "support/reference.hpp"

using namespace stscnn;
using stscnn::testing::random_tensor;
namespace fs = std::filesystem;

namespace {

TrainingSample random_scene(int bands, int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tensor4 x = random_tensor(Shape{1, bands, h, w}, rng, 0.0, 1.0);
    Tensor4 y2 = random_tensor(x.shape(), rng, 0.0, 1.0);
    return make_sample(std::move(x), std::move(y2), gen_stripe_mask(h, w, 4, 1, static_cast<int>(seed % 4)));
}

NetworkConfig tiny_config(int bands = 1) {
    NetworkConfig c;
    c.input_bands = bands;
    c.fusion_channels = 3;
    c.multiscale_channels = 2;
    c.trunk_channels = 6;
    return c;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("stscnn_trainer_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(ExtractPatches, GridCounts) {
    EXPECT_EQ(extract_patches(random_scene(1, 400, 400, 1), 40, 40).size(), 100u);
    EXPECT_EQ(extract_patches(random_scene(1, 1720, 2040, 2), 100, 100).size(), 340u);
    EXPECT_EQ(extract_patches(random_scene(1, 50, 70, 3), 20, 15).size(), 3u * 4u);
}

TEST(ExtractPatches, WholeSceneIsOnePatch) {
    const auto scene = random_scene(2, 24, 24, 4);
    const auto p = extract_patches(scene, 24, 5);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].x, scene.x);
    EXPECT_EQ(p[0].y1, scene.y1);
    EXPECT_EQ(p[0].y2, scene.y2);
    EXPECT_EQ(p[0].mask, scene.mask);
}

TEST(ExtractPatches, TooLargeThrows) {
    EXPECT_THROW(extract_patches(random_scene(1, 20, 30, 5), 21, 1), ArgumentError);
}

TEST(ExtractPatches, TilesReassembleScene) {
    const auto scene = random_scene(2, 30, 45, 6);
    const auto patches = extract_patches(scene, 15, 15);
    ASSERT_EQ(patches.size(), 6u);
    Tensor4 x(scene.x.shape()), y1(scene.x.shape()), y2(scene.x.shape());
    Mask m(30, 45, 0);
    std::size_t k = 0;
    for (int y0 = 0; y0 < 30; y0 += 15) {
        for (int x0 = 0; x0 < 45; x0 += 15, ++k) {
            for (int c = 0; c < 2; ++c) {
                for (int y = 0; y < 15; ++y) {
                    for (int q = 0; q < 15; ++q) {
                        x(0, c, y0 + y, x0 + q) = patches[k].x(0, c, y, q);
                        y1(0, c, y0 + y, x0 + q) = patches[k].y1(0, c, y, q);
                        y2(0, c, y0 + y, x0 + q) = patches[k].y2(0, c, y, q);
                        m.set(y0 + y, x0 + q, patches[k].mask.valid(y, q));
                    }
                }
            }
        }
    }
    EXPECT_EQ(x, scene.x);
    EXPECT_EQ(y1, scene.y1);
    EXPECT_EQ(y2, scene.y2);
    EXPECT_EQ(m, scene.mask);
}

TEST(ExtractPatches, DropsAllMissingPatches) {
    std::mt19937_64 rng(7);
    Tensor4 x = random_tensor(Shape{1, 1, 20, 20}, rng);
    Mask m(20, 20);
    for (int y = 0; y < 10; ++y) {
        for (int q = 10; q < 20; ++q) m.set(y, q, false);
    }
    std::size_t dropped = 0;
    const auto p = extract_patches(make_sample(x, x, m), 10, 10, &dropped);
    EXPECT_EQ(p.size(), 3u);
    EXPECT_EQ(dropped, 1u);
}

TEST(LearningRate, ScheduleValues) {
    TrainConfig cfg;
    EXPECT_DOUBLE_EQ(lr_at(0, cfg), 0.01);
    EXPECT_DOUBLE_EQ(lr_at(19, cfg), 0.01);
    EXPECT_DOUBLE_EQ(lr_at(20, cfg), 0.001);
    EXPECT_NEAR(lr_at(99, cfg), 1e-6, 1e-21);
    EXPECT_THROW(lr_at(100, cfg), ArgumentError);
    EXPECT_THROW(lr_at(-1, cfg), ArgumentError);
}

TEST(LearningRate, PiecewiseConstantNonIncreasing) {
    TrainConfig cfg;
    cfg.epochs = 130;
    cfg.decline_every = 13;
    cfg.decline = 0.5;
    for (int e = 1; e < cfg.epochs; ++e) {
        EXPECT_LE(lr_at(e, cfg), lr_at(e - 1, cfg));
        if (e % 13 == 0) {
            EXPECT_LT(lr_at(e, cfg), lr_at(e - 1, cfg));
        } else {
            EXPECT_EQ(lr_at(e, cfg), lr_at(e - 1, cfg));
        }
    }
}

TEST(TrainConfig, Validation) {
    TrainConfig cfg;
    cfg.decline = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.epochs = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.momentum = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_THROW(train({}, TrainConfig{}, tiny_config()), ArgumentError);
}

TEST(Train, ConstantZeroTargetIsLearned) {
    for (std::uint64_t seed : {1, 2, 3}) {
        std::mt19937_64 rng(seed + 100);
        const Tensor4 x = random_tensor(Shape{1, 1, 2, 2}, rng, 0.0, 1.0);
        TrainConfig cfg;
        cfg.epochs = 50;
        cfg.batch_size = 1;
        cfg.base_lr = 0.1;
        cfg.decline = 1.0;
        cfg.momentum = 0.5;
        cfg.precision = Precision::f64;
        cfg.seed = seed;
        const TrainResult r = train({make_sample(x, x, Mask(2, 2))}, cfg, tiny_config());
        ASSERT_EQ(r.trace.size(), 50u);
        EXPECT_LT(r.trace.back().mean_loss, 1e-6) << "seed " << seed;
    }
}

TEST(Train, SeededRunsAreBitwiseIdentical) {
    std::vector<TrainingSample> data;
    for (std::uint64_t s = 0; s < 5; ++s) data.push_back(random_scene(1, 12, 12, s));
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 2;
    cfg.seed = 11;
    for (auto precision : {Precision::f32, Precision::f64}) {
        cfg.precision = precision;
        const TrainResult a = train(data, cfg, tiny_config());
        const TrainResult b = train(data, cfg, tiny_config());
        ASSERT_EQ(a.trace.size(), b.trace.size());
        for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].mean_loss, b.trace[i].mean_loss);
        EXPECT_EQ(a.params, b.params);
    }
    cfg.seed = 12;
    const TrainResult c = train(data, cfg, tiny_config());
    const TrainResult d = [&] {
        cfg.seed = 11;
        return train(data, cfg, tiny_config());
    }();
    EXPECT_NE(c.trace.back().mean_loss, d.trace.back().mean_loss);
}

TEST(Train, DatasetIsNotMutated) {
    std::vector<TrainingSample> data{random_scene(1, 12, 12, 1), random_scene(1, 12, 12, 2)};
    const auto copy = data;
    TrainConfig cfg;
    cfg.epochs = 2;
    train(data, cfg, tiny_config());
    for (std::size_t i = 0; i < data.size(); ++i) {
        EXPECT_EQ(data[i].x, copy[i].x);
        EXPECT_EQ(data[i].y1, copy[i].y1);
        EXPECT_EQ(data[i].y2, copy[i].y2);
        EXPECT_EQ(data[i].mask, copy[i].mask);
    }
}

TEST(Train, LrTraceFollowsSchedule) {
    TrainConfig cfg;
    cfg.epochs = 45;
    cfg.max_iterations.reset();
    const TrainResult r = train({random_scene(1, 8, 8, 3)}, cfg, tiny_config());
    ASSERT_EQ(r.trace.size(), 45u);
    for (const auto& e : r.trace) EXPECT_EQ(e.lr, lr_at(e.epoch, cfg));
}

TEST(Train, IterationCap) {
    std::vector<TrainingSample> data;
    for (std::uint64_t s = 0; s < 10; ++s) data.push_back(random_scene(1, 8, 8, s));
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch_size = 1;
    cfg.max_iterations = 13;
    const TrainResult r = train(data, cfg, tiny_config());
    EXPECT_EQ(r.iterations, 13);
    EXPECT_EQ(r.trace.size(), 2u);
}

TEST(Train, CheckpointsEveryKEpochsAndAtEnd) {
    const fs::path dir = scratch_dir("cadence");
    TrainConfig cfg;
    cfg.epochs = 25;
    cfg.checkpoint_every = 10;
    cfg.checkpoint_dir = dir.string();
    const TrainResult r = train({random_scene(1, 8, 8, 4)}, cfg, tiny_config());
    EXPECT_TRUE(fs::exists(dir / "epoch_0010" / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "epoch_0020" / "manifest.json"));
    EXPECT_FALSE(fs::exists(dir / "epoch_0025"));
    EXPECT_EQ(load_checkpoint((dir / "final").string()), r.params);
    fs::remove_all(dir);
}

TEST(Train, NonFiniteLossAbortsAndKeepsLastCheckpoint) {
    const fs::path dir = scratch_dir("diverge");
    std::mt19937_64 rng(8);
    const Tensor4 x = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 1.0);
    const TrainingSample s = make_sample(x, x, Mask(8, 8));
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch_size = 1;
    cfg.checkpoint_every = 1;
    cfg.checkpoint_dir = dir.string();
    cfg.loss_normalization = LossNormalization::sample;
    cfg.precision = Precision::f64;
    cfg.base_lr = 0.1;
    cfg.seed = 3;
    try {
        train({s}, cfg, tiny_config());
        FAIL() << "expected divergence";
    } catch (const Error& e) {
        EXPECT_TRUE(dynamic_cast<const NumericError*>(&e) != nullptr) << e.what();
        EXPECT_NE(std::string(e.what()).find("checkpoint"), std::string::npos);
    }
    EXPECT_TRUE(fs::exists(dir / "epoch_0001" / "manifest.json"));
    EXPECT_FALSE(fs::exists(dir / "final"));
    const auto kept = load_checkpoint((dir / "epoch_0001").string());
    for (const auto& l : kept.layers) {
        for (double w : l.weights) EXPECT_TRUE(std::isfinite(w));
    }
    fs::remove_all(dir);
}
