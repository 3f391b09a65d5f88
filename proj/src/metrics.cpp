#include "stscnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stscnn {

std::string to_string(MetricScope scope) {
    return scope == MetricScope::full ? "full" : "gap_only";
}

MetricScope scope_from_string(const std::string& name) {
    if (name == "full") return MetricScope::full;
    if (name == "gap_only") return MetricScope::gap_only;
    throw ArgumentError("unknown metric scope '" + name + "' (expected full or gap_only)");
}

namespace {

void check_pair(const Tensor4& x, const Tensor4& y, const Mask* gaps, const char* what) {
    require_same_shape(x.shape(), y.shape(), what);
    if (x.n() != 1) throw ShapeError(std::string(what) + ": expected one image, got " + x.shape().str());
    if (gaps) require_mask_fits(*gaps, x.shape(), what);
}

void check_band(const Tensor4& x, int band, const char* what) {
    if (band < 0 || band >= x.c()) {
        throw ArgumentError(std::string(what) + ": band " + std::to_string(band) + " out of range");
    }
}

bool in_scope(const Mask* gaps, std::size_t i) { return gaps == nullptr || gaps->values()[i] == 0; }

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(size));
    const double c = (size - 1) / 2.0;
    double total = 0.0;
    for (int i = 0; i < size; ++i) {
        k[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
        total += k[i];
    }
    for (auto& v : k) v /= total;
    return k;
}

// Separable valid-mode filtering of an H x W plane.
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w,
                                 const std::vector<double>& k) {
    const int s = static_cast<int>(k.size());
    const int oh = h - s + 1;
    const int ow = w - s + 1;
    std::vector<double> rows(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < s; ++i) acc += k[i] * img[static_cast<std::size_t>(y) * w + x + i];
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < s; ++i) acc += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

} // namespace

double psnr(const Tensor4& x, const Tensor4& y, int band, double peak, const Mask* gaps) {
    check_pair(x, y, gaps, "psnr");
    check_band(x, band, "psnr");
    if (!(peak > 0.0)) throw ArgumentError("psnr: peak must be > 0");
    auto px = x.plane(0, band);
    auto py = y.plane(0, band);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (!in_scope(gaps, i)) continue;
        const double d = px[i] - py[i];
        sum += d * d;
        ++count;
    }
    if (count == 0) throw ArgumentError("psnr: empty scope region");
    const double mse = sum / static_cast<double>(count);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Tensor4& x, const Tensor4& y, int band, double peak, const Mask* gaps,
            const SsimParams& params) {
    check_pair(x, y, gaps, "ssim");
    check_band(x, band, "ssim");
    const int s = params.window;
    if (s < 1 || s % 2 == 0) throw ArgumentError("ssim: window must be odd and positive");
    if (x.h() < s || x.w() < s) {
        throw ShapeError("ssim: image " + std::to_string(x.h()) + "x" + std::to_string(x.w()) +
                         " is smaller than the " + std::to_string(s) + "x" + std::to_string(s) +
                         " window");
    }
    const int h = x.h();
    const int w = x.w();
    const std::size_t n = x.shape().plane();
    std::vector<double> a(x.plane(0, band).begin(), x.plane(0, band).end());
    std::vector<double> b(y.plane(0, band).begin(), y.plane(0, band).end());
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto k = gaussian_kernel(s, params.sigma);
    const auto mu_a = filter_valid(a, h, w, k);
    const auto mu_b = filter_valid(b, h, w, k);
    const auto e_aa = filter_valid(aa, h, w, k);
    const auto e_bb = filter_valid(bb, h, w, k);
    const auto e_ab = filter_valid(ab, h, w, k);

    const double c1 = (params.k1 * peak) * (params.k1 * peak);
    const double c2 = (params.k2 * peak) * (params.k2 * peak);
    const int ow = w - s + 1;
    const int r = s / 2;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        if (gaps) {
            const int cy = static_cast<int>(i) / ow + r;
            const int cx = static_cast<int>(i) % ow + r;
            if (gaps->valid(cy, cx)) continue;
        }
        const double va = e_aa[i] - mu_a[i] * mu_a[i];
        const double vb = e_bb[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        total += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
                 ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
        ++count;
    }
    if (count == 0) throw ArgumentError("ssim: no window is centred inside the scope region");
    return total / static_cast<double>(count);
}

double cc(const Tensor4& x, const Tensor4& y, int band, const Mask* gaps) {
    check_pair(x, y, gaps, "cc");
    if (band >= 0) check_band(x, band, "cc");
    const int b0 = band < 0 ? 0 : band;
    const int b1 = band < 0 ? x.c() : band + 1;
    double sx = 0.0, sy = 0.0;
    std::size_t count = 0;
    for (int c = b0; c < b1; ++c) {
        auto px = x.plane(0, c);
        auto py = y.plane(0, c);
        for (std::size_t i = 0; i < px.size(); ++i) {
            if (!in_scope(gaps, i)) continue;
            sx += px[i];
            sy += py[i];
            ++count;
        }
    }
    if (count < 2) throw ArgumentError("cc: fewer than two pixels in scope");
    const double mx = sx / static_cast<double>(count);
    const double my = sy / static_cast<double>(count);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int c = b0; c < b1; ++c) {
        auto px = x.plane(0, c);
        auto py = y.plane(0, c);
        for (std::size_t i = 0; i < px.size(); ++i) {
            if (!in_scope(gaps, i)) continue;
            const double dx = px[i] - mx;
            const double dy = py[i] - my;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    if (sxx == 0.0 || syy == 0.0) throw NumericError("cc: zero variance, correlation undefined");
    return sxy / std::sqrt(sxx * syy);
}

SamResult sam(const Tensor4& x, const Tensor4& y, const Mask* gaps) {
    check_pair(x, y, gaps, "sam");
    if (x.c() < 2) throw ArgumentError("sam: needs at least two bands");
    const std::size_t n = x.shape().plane();
    SamResult result;
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_scope(gaps, i)) continue;
        double nx = 0.0, ny = 0.0;
        for (int c = 0; c < x.c(); ++c) {
            const double a = x.plane(0, c)[i];
            const double b = y.plane(0, c)[i];
            nx += a * a;
            ny += b * b;
        }
        if (nx == 0.0 || ny == 0.0) {
            ++result.skipped;
            continue;
        }
        // Angle between the unit vectors as 2 atan2(|u - v|, |u + v|), summed in right angles.
        const double rx = 1.0 / std::sqrt(nx);
        const double ry = 1.0 / std::sqrt(ny);
        double diff = 0.0, sum = 0.0;
        for (int c = 0; c < x.c(); ++c) {
            const double u = x.plane(0, c)[i] * rx;
            const double v = y.plane(0, c)[i] * ry;
            diff += (u - v) * (u - v);
            sum += (u + v) * (u + v);
        }
        total += 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum)) / (std::numbers::pi / 2.0);
        ++used;
    }
    if (used == 0) throw ArgumentError("sam: every spectral vector in scope is zero");
    result.degrees = total / static_cast<double>(used) * 90.0;
    return result;
}

namespace {

// A flat reconstruction has no defined correlation; the report carries NaN.
double cc_or_nan(const Tensor4& x, const Tensor4& y, int band, const Mask* gaps) {
    try {
        return cc(x, y, band, gaps);
    } catch (const NumericError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace

MetricsReport evaluate_metrics(const Tensor4& truth, const Tensor4& estimate, double peak,
                               MetricScope scope, const Mask* mask) {
    if (scope == MetricScope::gap_only && mask == nullptr) {
        throw ArgumentError("evaluate_metrics: gap_only scope needs a mask");
    }
    const Mask* gaps = scope == MetricScope::gap_only ? mask : nullptr;
    MetricsReport report;
    report.scope = scope;
    report.data_range = peak;
    for (int b = 0; b < truth.c(); ++b) {
        BandMetrics m;
        m.psnr = psnr(truth, estimate, b, peak, gaps);
        m.ssim = ssim(truth, estimate, b, peak, gaps);
        m.cc = cc_or_nan(truth, estimate, b, gaps);
        report.bands.push_back(m);
        report.mpsnr += m.psnr;
        report.mssim += m.ssim;
    }
    report.mpsnr /= truth.c();
    report.mssim /= truth.c();
    report.cc_all = cc_or_nan(truth, estimate, -1, gaps);
    if (truth.c() >= 2) {
        const SamResult s = sam(truth, estimate, gaps);
        report.sam_mean = s.degrees;
        report.sam_skipped = s.skipped;
    }
    return report;
}

} // namespace stscnn
