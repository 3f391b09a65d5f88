#include "stscnn/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace stscnn {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to '" + path + "'");
}

std::vector<std::uint8_t> header(const Shape& s, Dtype dtype) {
    std::vector<std::uint8_t> out{'S', 'T', 'S', 'R'};
    put_u32(out, kTensorFileVersion);
    out.push_back(static_cast<std::uint8_t>(dtype));
    out.push_back(4);
    for (int d : {s.n, s.c, s.h, s.w}) put_u32(out, static_cast<std::uint32_t>(d));
    return out;
}

} // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor4& t, Dtype dtype) {
    auto out = header(t.shape(), dtype);
    out.reserve(kTensorHeaderBytes + t.size() * (dtype == Dtype::f32 ? 4 : 8));
    for (double v : t.data()) {
        if (dtype == Dtype::f32) {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        } else {
            put_u64(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    return out;
}

Tensor4 decode_tensor(const std::vector<std::uint8_t>& bytes, Dtype* dtype) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "STSR", 4) != 0) {
        throw FormatError("tensor file: bad magic (expected STSR)");
    }
    if (bytes.size() < kTensorHeaderBytes) throw FormatError("tensor file: truncated header");
    const std::uint32_t version = get_u32(bytes.data() + 4);
    if (version != kTensorFileVersion) {
        throw FormatError("tensor file: unsupported version " + std::to_string(version));
    }
    const std::uint8_t code = bytes[8];
    if (code > 1) throw FormatError("tensor file: unknown dtype code " + std::to_string(code));
    const std::uint8_t ndim = bytes[9];
    if (ndim != 4) throw FormatError("tensor file: ndim must be 4, got " + std::to_string(ndim));
    std::uint32_t dims[4];
    for (int i = 0; i < 4; ++i) {
        dims[i] = get_u32(bytes.data() + 10 + 4 * i);
        if (dims[i] > 0x7fffffffu) throw FormatError("tensor file: dimension out of range");
    }
    const Shape shape{static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
                      static_cast<int>(dims[3])};
    const std::size_t width = code == 0 ? 4 : 8;
    const std::size_t expected = shape.size() * width;
    const std::size_t actual = bytes.size() - kTensorHeaderBytes;
    if (actual != expected) {
        throw FormatError("tensor file: payload length " + std::to_string(actual) + " bytes, expected " +
                          std::to_string(expected) + " for " + shape.str());
    }
    Tensor4 t(shape);
    const std::uint8_t* p = bytes.data() + kTensorHeaderBytes;
    for (std::size_t i = 0; i < t.size(); ++i, p += width) {
        t[i] = code == 0 ? static_cast<double>(std::bit_cast<float>(get_u32(p)))
                         : std::bit_cast<double>(get_u64(p));
    }
    if (dtype) *dtype = static_cast<Dtype>(code);
    return t;
}

void write_tensor(const std::string& path, const Tensor4& t, Dtype dtype) {
    write_file(path, encode_tensor(t, dtype));
}

void write_tensor(const std::string& path, const Tensor4f& t) {
    write_file(path, encode_tensor(t.cast<double>(), Dtype::f32));
}

Tensor4 read_tensor(const std::string& path, Dtype* dtype) {
    try {
        return decode_tensor(read_file(path), dtype);
    } catch (const FormatError& e) {
        throw FormatError("'" + path + "': " + e.what());
    }
}

void write_mask(const std::string& path, const Mask& mask) {
    write_tensor(path, mask.to_tensor<double>(), Dtype::f32);
}

Mask read_mask(const std::string& path) {
    const Tensor4 t = read_tensor(path);
    try {
        return Mask::from_tensor(t);
    } catch (const Error& e) {
        throw FormatError("'" + path + "' is not a mask: " + e.what());
    }
}

std::vector<std::uint8_t> encode_image(const Tensor4& x, const std::vector<int>& bands, double lo,
                                       double hi) {
    if (bands.size() != 1 && bands.size() != 3) {
        throw ArgumentError("export_image: give one band (PGM) or three bands (PPM)");
    }
    for (int b : bands) {
        if (b < 0 || b >= x.c()) {
            throw ArgumentError("export_image: band " + std::to_string(b) + " out of range for " +
                                std::to_string(x.c()) + " bands");
        }
    }
    if (!(hi > lo)) throw ArgumentError("export_image: range must satisfy hi > lo");
    if (x.n() < 1) throw ShapeError("export_image: empty tensor");
    const std::string head = std::string(bands.size() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(x.w()) + " " + std::to_string(x.h()) + "\n255\n";
    std::vector<std::uint8_t> out(head.begin(), head.end());
    out.reserve(out.size() + x.shape().plane() * bands.size());
    for (int y = 0; y < x.h(); ++y) {
        for (int q = 0; q < x.w(); ++q) {
            for (int b : bands) {
                const double t = std::clamp((x(0, b, y, q) - lo) / (hi - lo), 0.0, 1.0);
                out.push_back(static_cast<std::uint8_t>(std::lround(t * 255.0)));
            }
        }
    }
    return out;
}

void export_image(const Tensor4& x, const std::vector<int>& bands, const std::string& path, double lo,
                  double hi) {
    write_file(path, encode_image(x, bands, lo, hi));
}

} // namespace stscnn
