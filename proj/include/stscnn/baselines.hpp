#pragma once

#include <vector>

#include "stscnn/mask.hpp"
#include "stscnn/tensor.hpp"

namespace stscnn {

/// Polynomial regression of an observed band on the auxiliary band:
/// x ~ coeffs[0] + coeffs[1] * y2 + coeffs[2] * y2^2 + ...
struct LinearFit {
    std::vector<double> coeffs;
    double rms = 0.0;  // residual RMS over the fitted pixels

    double intercept() const { return coeffs.at(0); }
    double slope() const { return coeffs.at(1); }
    double operator()(double v) const;
};

/// Least-squares fit of band `band` of x_observed on the same band of y2,
/// using only the valid pixels of `mask`. Both images are 1 x B x H x W.
LinearFit lf_fit(const Tensor4& y2, const Tensor4& x_observed, int band, const Mask& mask,
                 int degree = 1);

/// Fills gap pixels of each band with the per-band fit evaluated on y2.
Tensor4 lf_reconstruct(const Tensor4& y1, const Tensor4& y2, const Mask& mask, int degree = 1);

/// Fills gap pixels with y2 verbatim.
Tensor4 copy_fill(const Tensor4& y1, const Tensor4& y2, const Mask& mask);

} // namespace stscnn
