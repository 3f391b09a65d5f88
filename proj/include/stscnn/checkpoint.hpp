#pragma once

#include <string>

#include "stscnn/network.hpp"

namespace stscnn {

inline constexpr int kCheckpointVersion = 1;

/// Writes `dir`/manifest.json plus one tensor file per layer weight and bias.
/// The directory is created when missing; existing files are replaced.
void save_checkpoint(const NetworkParams<double>& params, const std::string& dir);

/// Reads a checkpoint written by save_checkpoint. Throws FormatError on a
/// missing or malformed manifest, an unknown version, or tensors whose
/// shapes disagree with the stored network config.
NetworkParams<double> load_checkpoint(const std::string& dir);

} // namespace stscnn
