#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>

#include "stscnn/baselines.hpp"
#include "stscnn/checkpoint.hpp"
#include "stscnn/experiment.hpp"
#include "stscnn/io.hpp"
#include "stscnn/metrics.hpp"
#include "stscnn/network.hpp"
#include "stscnn/synth.hpp"

namespace py = pybind11;
using namespace stscnn;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

// Accepts (C, H, W) or (N, C, H, W).
Tensor4 to_tensor(const DoubleArray& a) {
    if (a.ndim() != 3 && a.ndim() != 4) {
        throw ShapeError("expected an array of shape (C, H, W) or (N, C, H, W), got ndim " + std::to_string(a.ndim()));
    }
    const int off = a.ndim() == 4 ? 1 : 0;
    const Shape s{off ? static_cast<int>(a.shape(0)) : 1, static_cast<int>(a.shape(off)),
                  static_cast<int>(a.shape(off + 1)), static_cast<int>(a.shape(off + 2))};
    return Tensor4(s, std::vector<double>(a.data(), a.data() + a.size()));
}

// Drops the batch axis when it is 1.
DoubleArray to_array(const Tensor4& t) {
    std::vector<py::ssize_t> shape{t.n(), t.c(), t.h(), t.w()};
    if (t.n() == 1) shape.erase(shape.begin());
    DoubleArray out(shape);
    std::memcpy(out.mutable_data(), t.raw(), t.size() * sizeof(double));
    return out;
}

Mask to_mask(const ByteArray& a) {
    if (a.ndim() != 2) throw ShapeError("mask must be a 2-D array");
    return Mask(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

ByteArray from_mask(const Mask& m) {
    ByteArray out({m.height(), m.width()});
    const auto v = m.values();
    std::memcpy(out.mutable_data(), v.data(), v.size());
    return out;
}

const Mask* optional_mask(const std::optional<ByteArray>& a, Mask& storage) {
    if (!a) return nullptr;
    storage = to_mask(*a);
    return &storage;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-input residual CNN for reconstructing missing pixels in multi-band rasters";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.def(
        "synth_scene",
        [](int bands, int height, int width, std::uint64_t seed, const std::string& relation) {
            const auto s = synth_scene(bands, height, width, seed, relation_from_string(relation));
            return py::make_tuple(to_array(s.x), to_array(s.y2));
        },
        py::arg("bands") = 2, py::arg("height") = 256, py::arg("width") = 256, py::arg("seed") = 1,
        py::arg("relation") = "nonlinear", "Synthetic clean scene x and auxiliary image y2, each (B, H, W).");

    m.def(
        "stripe_mask",
        [](int height, int width, int period, int stripe_width, int phase) {
            return from_mask(gen_stripe_mask(height, width, period, stripe_width, phase));
        },
        py::arg("height"), py::arg("width"), py::arg("period") = 4, py::arg("stripe_width") = 1, py::arg("phase") = 0);
    m.def(
        "slcoff_mask",
        [](int height, int width, int max_gap, int center_band, int period, double angle_deg, int phase) {
            return from_mask(gen_slcoff_mask(height, width, SlcOffParams{center_band, max_gap, period, angle_deg, phase}));
        },
        py::arg("height"), py::arg("width"), py::arg("max_gap") = 10, py::arg("center_band") = 0,
        py::arg("period") = 33, py::arg("angle_deg") = 8.0, py::arg("phase") = 0);
    m.def(
        "cloud_mask",
        [](int height, int width, double coverage, double smoothness, std::uint64_t seed) {
            return from_mask(gen_cloud_mask(height, width, coverage, smoothness, seed));
        },
        py::arg("height"), py::arg("width"), py::arg("coverage") = 0.15, py::arg("smoothness") = 6.0,
        py::arg("seed") = 1);
    m.def(
        "apply_mask", [](const DoubleArray& x, const ByteArray& mask) { return to_array(apply_mask(to_tensor(x), to_mask(mask), 0.0)); },
        py::arg("x"), py::arg("mask"), "Zero the pixels where mask is 0.");

    m.def(
        "psnr",
        [](const DoubleArray& x, const DoubleArray& y, int band, double peak, const std::optional<ByteArray>& gaps) {
            Mask storage;
            return psnr(to_tensor(x), to_tensor(y), band, peak, optional_mask(gaps, storage));
        },
        py::arg("x"), py::arg("y"), py::arg("band") = 0, py::arg("peak") = 1.0, py::arg("gaps") = py::none(),
        "PSNR of one band; with `gaps`, only pixels where the mask is 0 count.");
    m.def(
        "ssim",
        [](const DoubleArray& x, const DoubleArray& y, int band, double peak, const std::optional<ByteArray>& gaps) {
            Mask storage;
            return ssim(to_tensor(x), to_tensor(y), band, peak, optional_mask(gaps, storage));
        },
        py::arg("x"), py::arg("y"), py::arg("band") = 0, py::arg("peak") = 1.0, py::arg("gaps") = py::none());
    m.def(
        "cc",
        [](const DoubleArray& x, const DoubleArray& y, int band, const std::optional<ByteArray>& gaps) {
            Mask storage;
            return cc(to_tensor(x), to_tensor(y), band, optional_mask(gaps, storage));
        },
        py::arg("x"), py::arg("y"), py::arg("band") = -1, py::arg("gaps") = py::none(),
        "Pearson correlation of one band, or of all bands pooled when band < 0.");
    m.def(
        "sam",
        [](const DoubleArray& x, const DoubleArray& y, const std::optional<ByteArray>& gaps) {
            Mask storage;
            return sam(to_tensor(x), to_tensor(y), optional_mask(gaps, storage)).degrees;
        },
        py::arg("x"), py::arg("y"), py::arg("gaps") = py::none(), "Mean spectral angle in degrees.");
    m.def(
        "evaluate",
        [](const DoubleArray& truth, const DoubleArray& estimate, const ByteArray& mask, double peak,
           const std::string& scope) {
            const Mask mk = to_mask(mask);
            const auto r = evaluate_metrics(to_tensor(truth), to_tensor(estimate), peak, scope_from_string(scope), &mk);
            py::list bands;
            for (const auto& b : r.bands) bands.append(py::dict(py::arg("psnr") = b.psnr, py::arg("ssim") = b.ssim, py::arg("cc") = b.cc));
            return py::dict(py::arg("scope") = to_string(r.scope), py::arg("mpsnr") = r.mpsnr,
                            py::arg("mssim") = r.mssim, py::arg("cc") = r.cc_all, py::arg("sam") = r.sam_mean,
                            py::arg("bands") = bands);
        },
        py::arg("truth"), py::arg("estimate"), py::arg("mask"), py::arg("peak") = 1.0, py::arg("scope") = "gap_only");

    m.def(
        "lf_reconstruct",
        [](const DoubleArray& y1, const DoubleArray& y2, const ByteArray& mask, int degree) {
            return to_array(lf_reconstruct(to_tensor(y1), to_tensor(y2), to_mask(mask), degree));
        },
        py::arg("y1"), py::arg("y2"), py::arg("mask"), py::arg("degree") = 1);
    m.def(
        "copy_fill",
        [](const DoubleArray& y1, const DoubleArray& y2, const ByteArray& mask) {
            return to_array(copy_fill(to_tensor(y1), to_tensor(y2), to_mask(mask)));
        },
        py::arg("y1"), py::arg("y2"), py::arg("mask"));

    m.def("read_tensor", [](const std::string& path) { return to_array(read_tensor(path)); }, py::arg("path"));
    m.def(
        "write_tensor", [](const std::string& path, const DoubleArray& a) { write_tensor(path, to_tensor(a)); },
        py::arg("path"), py::arg("array"));

    py::class_<NetworkParams<double>>(m, "Network")
        .def(py::init([](int input_bands, std::uint64_t seed, int fusion_channels, int multiscale_channels,
                         int trunk_channels, bool multiscale, bool boost) {
                 NetworkConfig c;
                 c.input_bands = input_bands;
                 c.fusion_channels = fusion_channels;
                 c.multiscale_channels = multiscale_channels;
                 c.trunk_channels = trunk_channels;
                 c.multiscale = multiscale;
                 c.boost = boost;
                 return build_network(c, seed);
             }),
             py::arg("input_bands") = 2, py::arg("seed") = 0, py::arg("fusion_channels") = 30,
             py::arg("multiscale_channels") = 20, py::arg("trunk_channels") = 60,
             py::arg("multiscale") = true, py::arg("boost") = true)
        .def_static("load", &load_checkpoint, py::arg("directory"))
        .def("save", [](const NetworkParams<double>& p, const std::string& dir) { save_checkpoint(p, dir); },
             py::arg("directory"))
        .def_property_readonly("parameter_count", &NetworkParams<double>::parameter_count)
        .def_property_readonly("layer_names",
                               [](const NetworkParams<double>& p) {
                                   std::vector<std::string> names;
                                   for (const auto& l : p.layers) names.push_back(l.name);
                                   return names;
                               })
        .def(
            "reconstruct",
            [](const NetworkParams<double>& p, const DoubleArray& y1, const DoubleArray& y2, const ByteArray& mask,
               double lo, double hi) {
                return to_array(reconstruct(p, to_tensor(y1), to_tensor(y2), to_mask(mask), ValueRange{lo, hi}));
            },
            py::arg("y1"), py::arg("y2"), py::arg("mask"), py::arg("lo") = 0.0, py::arg("hi") = 1.0,
            "Gap-filled image: y1 where the mask is 1, the clamped network estimate elsewhere.");

    m.def(
        "gradient_check",
        [](int height, int width, std::uint64_t seed) {
            NetworkConfig tiny;
            tiny.input_bands = 1;
            tiny.fusion_channels = 3;
            tiny.multiscale_channels = 2;
            tiny.trunk_channels = 6;
            const auto r = gradient_check(tiny, height, width, seed);
            return py::make_tuple(r.max_relative_error, r.worst_layer, r.checked);
        },
        py::arg("height") = 8, py::arg("width") = 8, py::arg("seed") = 1,
        "Finite-difference check on a tiny network: (max relative error, worst layer, parameters checked).");
}
