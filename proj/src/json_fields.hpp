#pragma once

// Strict JSON object reading shared by the checkpoint manifest and the
// experiment config: every key must be known and correctly typed.

#include <set>
#include <string>

#include "json.hpp"
#include "stscnn/error.hpp"
#include "stscnn/network.hpp"
#include "stscnn/trainer.hpp"

namespace stscnn::detail {

using nlohmann::json;

class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    void optional(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    template <typename T>
    void required(const std::string& key, T& out) {
        if (!j_.contains(key)) throw ConfigError(where_ + ": missing key '" + key + "'");
        optional(key, out);
    }

    const json& child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

inline json to_json(const NetworkConfig& c) {
    return json{{"input_bands", c.input_bands},       {"fusion_channels", c.fusion_channels},
                {"multiscale_channels", c.multiscale_channels}, {"dilations", c.dilations},
                {"trunk_channels", c.trunk_channels}, {"multiscale", c.multiscale},
                {"boost", c.boost}};
}

/// Keys present in `j` override the matching fields of `c`.
inline NetworkConfig network_config_from_json(const json& j, const std::string& where, NetworkConfig c = {}) {
    ObjectReader r(j, where);
    r.optional("input_bands", c.input_bands);
    r.optional("fusion_channels", c.fusion_channels);
    r.optional("multiscale_channels", c.multiscale_channels);
    r.optional("dilations", c.dilations);
    r.optional("trunk_channels", c.trunk_channels);
    r.optional("multiscale", c.multiscale);
    r.optional("boost", c.boost);
    r.finish();
    c.validate();
    return c;
}

inline json to_json(const TrainConfig& c) {
    json j{{"epochs", c.epochs},
           {"base_lr", c.base_lr},
           {"decline", c.decline},
           {"decline_every", c.decline_every},
           {"momentum", c.momentum},
           {"batch_size", c.batch_size},
           {"patch_size", c.patch_size},
           {"patch_stride", c.patch_stride},
           {"seed", c.seed},
           {"precision", to_string(c.precision)},
           {"loss_normalization", to_string(c.loss_normalization)},
           {"checkpoint_every", c.checkpoint_every}};
    if (c.max_iterations) j["max_iterations"] = *c.max_iterations;
    return j;
}

inline TrainConfig train_config_from_json(const json& j, const std::string& where, TrainConfig c = {}) {
    ObjectReader r(j, where);
    r.optional("epochs", c.epochs);
    r.optional("base_lr", c.base_lr);
    r.optional("decline", c.decline);
    r.optional("decline_every", c.decline_every);
    r.optional("momentum", c.momentum);
    r.optional("batch_size", c.batch_size);
    r.optional("patch_size", c.patch_size);
    r.optional("patch_stride", c.patch_stride);
    r.optional("seed", c.seed);
    std::string precision = to_string(c.precision);
    r.optional("precision", precision);
    std::string norm = to_string(c.loss_normalization);
    r.optional("loss_normalization", norm);
    long long max_iter = 0;
    r.optional("max_iterations", max_iter);
    r.optional("checkpoint_every", c.checkpoint_every);
    r.finish();
    try {
        c.precision = precision_from_string(precision);
        c.loss_normalization = loss_normalization_from_string(norm);
    } catch (const ArgumentError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    if (j.contains("max_iterations")) c.max_iterations = max_iter;
    c.validate();
    return c;
}

} // namespace stscnn::detail
