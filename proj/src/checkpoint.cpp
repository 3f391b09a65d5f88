#include "stscnn/checkpoint.hpp"

#include <filesystem>
#include <fstream>

#include "json_fields.hpp"
#include "stscnn/io.hpp"

namespace stscnn {

namespace fs = std::filesystem;
using detail::json;

void save_checkpoint(const NetworkParams<double>& params, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create checkpoint directory '" + dir + "': " + ec.message());

    json layers = json::array();
    for (const auto& l : params.layers) {
        const std::string wfile = l.name + ".weights.stsr";
        const std::string bfile = l.name + ".biases.stsr";
        write_tensor((fs::path(dir) / wfile).string(),
                     Tensor4(Shape{l.out_channels, l.in_channels, l.kernel_size, l.kernel_size}, l.weights));
        write_tensor((fs::path(dir) / bfile).string(), Tensor4(Shape{1, 1, 1, l.out_channels}, l.biases));
        layers.push_back({{"name", l.name},
                          {"in_channels", l.in_channels},
                          {"out_channels", l.out_channels},
                          {"kernel_size", l.kernel_size},
                          {"dilation", l.dilation},
                          {"activation", l.activation == Activation::relu ? "relu" : "linear"},
                          {"weights", wfile},
                          {"biases", bfile}});
    }
    const json manifest{{"format", "stscnn-checkpoint"},
                        {"format_version", kCheckpointVersion},
                        {"config", detail::to_json(params.config)},
                        {"parameter_count", params.parameter_count()},
                        {"layers", layers}};
    const auto path = fs::path(dir) / "manifest.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << manifest.dump(2) << '\n';
}

namespace {

void load_layers(NetworkParams<double>& params, const json& entries, const std::string& dir) {
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        auto& l = params.layers[k];
        const auto& e = entries[k];
        if (e.value("name", "") != l.name) {
            throw FormatError("checkpoint manifest: layer " + std::to_string(k) + " should be '" + l.name + "'");
        }
        const Tensor4 w = read_tensor((fs::path(dir) / e.at("weights").get<std::string>()).string());
        const Tensor4 b = read_tensor((fs::path(dir) / e.at("biases").get<std::string>()).string());
        const Shape ws{l.out_channels, l.in_channels, l.kernel_size, l.kernel_size};
        if (w.shape() != ws || b.shape() != Shape{1, 1, 1, l.out_channels}) {
            throw FormatError("checkpoint: tensor shapes for layer '" + l.name + "' do not match its config");
        }
        l.weights.assign(w.data().begin(), w.data().end());
        l.biases.assign(b.data().begin(), b.data().end());
    }
}

} // namespace

NetworkParams<double> load_checkpoint(const std::string& dir) {
    const auto path = fs::path(dir) / "manifest.json";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint manifest '" + path.string() + "'");
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("checkpoint manifest '" + path.string() + "': " + e.what());
    }
    if (!manifest.is_object() || manifest.value("format", "") != "stscnn-checkpoint") {
        throw FormatError("checkpoint manifest '" + path.string() + "': not a checkpoint manifest");
    }
    if (manifest.value("format_version", -1) != kCheckpointVersion) {
        throw FormatError("checkpoint manifest '" + path.string() + "': unsupported format_version");
    }
    NetworkConfig config;
    try {
        config = detail::network_config_from_json(manifest.at("config"), "checkpoint.config");
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint manifest: ") + e.what());
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint manifest: ") + e.what());
    }
    // Shapes, names and order come from the config; the files only supply values.
    NetworkParams<double> params = build_network(config, 0);
    if (!manifest.contains("layers")) throw FormatError("checkpoint manifest: missing 'layers'");
    const auto& entries = manifest["layers"];
    if (!entries.is_array() || entries.size() != params.layers.size()) {
        throw FormatError("checkpoint manifest: expected " + std::to_string(params.layers.size()) +
                          " layers");
    }
    try {
        load_layers(params, entries, dir);
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint manifest: ") + e.what());
    }
    return params;
}

} // namespace stscnn
