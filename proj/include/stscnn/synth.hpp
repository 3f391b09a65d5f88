#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stscnn/tensor.hpp"

namespace stscnn {

/// How the auxiliary image relates to the clean scene.
enum class Relation { affine, nonlinear };

std::string to_string(Relation relation);
Relation relation_from_string(const std::string& name);

struct SyntheticScene {
    Tensor4 x;   // 1 x B x H x W clean scene in [0.05, 0.95]
    Tensor4 y2;  // auxiliary image of the same geometry
    // Per-band generating map y2 = gain * x + offset (+ curvature * (x - 0.5)^2 + texture).
    std::vector<double> gain;
    std::vector<double> offset;
    std::vector<double> curvature;
};

/// Textured, spatially correlated multi-band scene plus an auxiliary image.
/// Bands mix three smoothed noise fields at different scales; in nonlinear
/// mode the auxiliary also gets a quadratic term and its own texture.
SyntheticScene synth_scene(int bands, int height, int width, std::uint64_t seed, Relation relation);

} // namespace stscnn
