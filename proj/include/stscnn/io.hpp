#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stscnn/mask.hpp"
#include "stscnn/tensor.hpp"

namespace stscnn {

/// Element type stored in a tensor file.
enum class Dtype : std::uint8_t { f32 = 0, f64 = 1 };

/// Tensor file layout (all integers little-endian):
///   "STSR" | u32 version (1) | u8 dtype | u8 ndim (4) | 4 x u32 dims (N, C, H, W) | payload
inline constexpr std::uint32_t kTensorFileVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 4 + 4 + 1 + 1 + 4 * 4;

void write_tensor(const std::string& path, const Tensor4& t, Dtype dtype = Dtype::f64);
void write_tensor(const std::string& path, const Tensor4f& t);

/// Reads either dtype; f32 payloads are widened exactly. `dtype` receives the stored type.
Tensor4 read_tensor(const std::string& path, Dtype* dtype = nullptr);

std::vector<std::uint8_t> encode_tensor(const Tensor4& t, Dtype dtype = Dtype::f64);
Tensor4 decode_tensor(const std::vector<std::uint8_t>& bytes, Dtype* dtype = nullptr);

/// Masks are stored as 1 x 1 x H x W tensors of 0/1.
void write_mask(const std::string& path, const Mask& mask);
Mask read_mask(const std::string& path);

/// Binary PGM (one band) or PPM (three bands) from sample 0, with values
/// mapped linearly from [lo, hi] to 0..255 and clamped.
void export_image(const Tensor4& x, const std::vector<int>& bands, const std::string& path,
                  double lo = 0.0, double hi = 1.0);
std::vector<std::uint8_t> encode_image(const Tensor4& x, const std::vector<int>& bands,
                                       double lo = 0.0, double hi = 1.0);

} // namespace stscnn
