#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "labdx/errors.hpp"
#include "labdx/synth.hpp"
#include "labdx/train.hpp"

namespace labdx {

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Full run configuration; defaults reproduce the published training setup
// (hidden 64, Adam lr 0.0005 with decay 0.99, eta 0.5).
struct RunConfig {
    std::string model = "vrnn_nn";
    int hidden_dim = 64;
    int latent_dim = 32;
    double eta = 0.5;
    double lr = 0.0005;
    double lr_decay = 0.99;
    int batch_size = 64;
    int max_epochs = 100;
    int patience = 10;
    double disc_weight = 1.0;
    double clip_norm = 5.0;
    int max_days = 100;
    unsigned long seed = 0;
    std::vector<unsigned long> split_seeds = {1, 2, 3, 4, 5};
    std::string dataset;  // data source descriptor (JSONL path)
    SynthConfig synth;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["model"] = model;
        j["hidden_dim"] = hidden_dim;
        j["latent_dim"] = latent_dim;
        j["eta"] = eta;
        j["lr"] = lr;
        j["lr_decay"] = lr_decay;
        j["batch_size"] = batch_size;
        j["max_epochs"] = max_epochs;
        j["patience"] = patience;
        j["disc_weight"] = disc_weight;
        j["clip_norm"] = clip_norm;
        j["max_days"] = max_days;
        j["seed"] = seed;
        j["split_seeds"] = split_seeds;
        j["dataset"] = dataset;
        j["synth"] = {{"num_classes", synth.num_classes},
                      {"num_tests", synth.num_tests},
                      {"t_min", synth.t_min},
                      {"t_max", synth.t_max},
                      {"num_episodes", synth.num_episodes},
                      {"missing_rate", synth.missing_rate},
                      {"latent_dim", synth.latent_dim},
                      {"temporal_strength", synth.temporal_strength},
                      {"offset_scale", synth.offset_scale},
                      {"damping", synth.damping},
                      {"obs_noise", synth.obs_noise}};
        return j;
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("model", c.model);
        get("hidden_dim", c.hidden_dim);
        get("latent_dim", c.latent_dim);
        get("eta", c.eta);
        get("lr", c.lr);
        get("lr_decay", c.lr_decay);
        get("batch_size", c.batch_size);
        get("max_epochs", c.max_epochs);
        get("patience", c.patience);
        get("disc_weight", c.disc_weight);
        get("clip_norm", c.clip_norm);
        get("max_days", c.max_days);
        get("seed", c.seed);
        get("split_seeds", c.split_seeds);
        get("dataset", c.dataset);
        if (j.contains("synth")) {
            const auto& s = j.at("synth");
            auto gets = [&](const char* key, auto& field) {
                if (s.contains(key)) {
                    field = s.at(key).get<std::decay_t<decltype(field)>>();
                }
            };
            gets("num_classes", c.synth.num_classes);
            gets("num_tests", c.synth.num_tests);
            gets("t_min", c.synth.t_min);
            gets("t_max", c.synth.t_max);
            gets("num_episodes", c.synth.num_episodes);
            gets("missing_rate", c.synth.missing_rate);
            gets("latent_dim", c.synth.latent_dim);
            gets("temporal_strength", c.synth.temporal_strength);
            gets("offset_scale", c.synth.offset_scale);
            gets("damping", c.synth.damping);
            gets("obs_noise", c.synth.obs_noise);
        }
        return c;
    }

    std::string hash() const { return fnv1a_hex(to_json().dump()); }

    TrainConfig train_config() const {
        TrainConfig t;
        t.lr = lr;
        t.lr_decay = lr_decay;
        t.batch_size = batch_size;
        t.max_epochs = max_epochs;
        t.patience = patience;
        t.eta = eta;
        t.disc_weight = disc_weight;
        t.clip_norm = clip_norm;
        t.hidden_dim = hidden_dim;
        t.latent_dim = latent_dim;
        t.seed = seed;
        return t;
    }
};

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return RunConfig::from_json(j);
}

}  // namespace labdx
