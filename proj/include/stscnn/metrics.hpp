#pragma once

#include <string>
#include <vector>

#include "stscnn/mask.hpp"
#include "stscnn/tensor.hpp"

namespace stscnn {

/// Which pixels a metric looks at. `gap_only` restricts it to mask == 0.
enum class MetricScope { full, gap_only };

std::string to_string(MetricScope scope);
MetricScope scope_from_string(const std::string& name);

/// Gaussian SSIM window and stabilising constants.
struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

// All metrics take 1 x B x H x W images. A non-null `gaps` restricts the
// computation to its missing pixels; nullptr means the whole image.

/// 10 log10(peak^2 / MSE) of one band; +inf when the band matches exactly.
double psnr(const Tensor4& x, const Tensor4& y, int band, double peak, const Mask* gaps = nullptr);

/// Mean of the local SSIM map over all complete windows. With `gaps`, only
/// windows centred on a missing pixel contribute.
double ssim(const Tensor4& x, const Tensor4& y, int band, double peak, const Mask* gaps = nullptr,
            const SsimParams& params = {});

/// Pearson correlation of one band, or of all bands pooled when band < 0.
double cc(const Tensor4& x, const Tensor4& y, int band = -1, const Mask* gaps = nullptr);

struct SamResult {
    double degrees = 0.0;         // mean spectral angle
    std::size_t skipped = 0;      // pixels where either spectrum was all zero
};

/// Mean spectral angle between the per-pixel band vectors.
SamResult sam(const Tensor4& x, const Tensor4& y, const Mask* gaps = nullptr);

struct BandMetrics {
    double psnr = 0.0;
    double ssim = 0.0;
    double cc = 0.0;
};

struct MetricsReport {
    MetricScope scope = MetricScope::full;
    double data_range = 1.0;
    std::vector<BandMetrics> bands;
    double mpsnr = 0.0;
    double mssim = 0.0;
    double cc_all = 0.0;
    double sam_mean = 0.0;
    std::size_t sam_skipped = 0;
};

/// Every metric for a reconstruction `estimate` of `truth`. gap_only needs the mask.
MetricsReport evaluate_metrics(const Tensor4& truth, const Tensor4& estimate, double peak,
                               MetricScope scope, const Mask* mask = nullptr);

} // namespace stscnn
