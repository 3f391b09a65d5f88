#include "stscnn/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace stscnn {

double LinearFit::operator()(double v) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * v + *it;
    return acc;
}

LinearFit lf_fit(const Tensor4& y2, const Tensor4& x_observed, int band, const Mask& mask,
                 int degree) {
    require_same_shape(y2.shape(), x_observed.shape(), "lf_fit");
    require_mask_fits(mask, y2.shape(), "lf_fit");
    if (y2.n() != 1) throw ShapeError("lf_fit: expected one image, got " + y2.shape().str());
    if (band < 0 || band >= y2.c()) throw ArgumentError("lf_fit: band out of range");
    if (degree < 1) throw ArgumentError("lf_fit: degree must be >= 1");

    auto src = y2.plane(0, band);
    auto dst = x_observed.plane(0, band);
    auto valid = mask.values();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (valid[i]) idx.push_back(i);
    }
    const auto terms = static_cast<Eigen::Index>(degree + 1);
    if (static_cast<Eigen::Index>(idx.size()) < std::max<Eigen::Index>(2, terms)) {
        throw ArgumentError("lf_fit: not enough valid pixels for a degree-" +
                            std::to_string(degree) + " fit");
    }

    Eigen::MatrixXd a(static_cast<Eigen::Index>(idx.size()), terms);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(idx.size()));
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const double v = src[idx[r]];
        double p = 1.0;
        for (Eigen::Index k = 0; k < terms; ++k) {
            a(r, k) = p;
            p *= v;
        }
        rhs(r) = dst[idx[r]];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < terms) throw ArgumentError("lf_fit: auxiliary band is degenerate on valid pixels");
    const Eigen::VectorXd sol = qr.solve(rhs);

    LinearFit fit;
    fit.coeffs.assign(sol.data(), sol.data() + sol.size());
    double ss = 0.0;
    for (std::size_t i : idx) {
        const double e = dst[i] - fit(src[i]);
        ss += e * e;
    }
    fit.rms = std::sqrt(ss / static_cast<double>(idx.size()));
    return fit;
}

Tensor4 lf_reconstruct(const Tensor4& y1, const Tensor4& y2, const Mask& mask, int degree) {
    require_same_shape(y1.shape(), y2.shape(), "lf_reconstruct");
    require_mask_fits(mask, y1.shape(), "lf_reconstruct");
    Tensor4 out = y1;
    auto valid = mask.values();
    for (int b = 0; b < y1.c(); ++b) {
        const LinearFit fit = lf_fit(y2, y1, b, mask, degree);
        auto src = y2.plane(0, b);
        auto dst = out.plane(0, b);
        for (std::size_t i = 0; i < dst.size(); ++i) {
            if (!valid[i]) dst[i] = fit(src[i]);
        }
    }
    return out;
}

Tensor4 copy_fill(const Tensor4& y1, const Tensor4& y2, const Mask& mask) {
    require_same_shape(y1.shape(), y2.shape(), "copy_fill");
    require_mask_fits(mask, y1.shape(), "copy_fill");
    Tensor4 out = y1;
    auto valid = mask.values();
    for (int n = 0; n < y1.n(); ++n) {
        for (int b = 0; b < y1.c(); ++b) {
            auto src = y2.plane(n, b);
            auto dst = out.plane(n, b);
            for (std::size_t i = 0; i < dst.size(); ++i) {
                if (!valid[i]) dst[i] = src[i];
            }
        }
    }
    return out;
}

} // namespace stscnn
