#pragma once

#include <fstream>
#include <optional>
#include <string>

#include "json.hpp"
#include "labdx/adam.hpp"
#include "labdx/config.hpp"
#include "labdx/data.hpp"
#include "labdx/errors.hpp"
#include "labdx/models.hpp"

namespace labdx {

inline constexpr const char* kCheckpointFormat = "labdx-checkpoint-v1";

struct Checkpoint {
    ModelParams params;
    AdamState adam;
    NormStats stats;
    RunConfig config;
    std::string config_hash;
    unsigned long split_seed = 0;
    int epochs_run = 0;
    int best_epoch = -1;
};

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["arch"] = arch_name(ck.params.arch);
    j["input_dim"] = ck.params.input_dim;
    j["num_classes"] = ck.params.num_classes;
    j["hidden_dim"] = ck.params.hidden_dim;
    j["latent_dim"] = ck.params.latent_dim;
    j["eta"] = ck.params.eta;
    nlohmann::json blocks;
    for (const auto& [name, t] : ck.params.blocks) {
        t.check_finite(name);
        blocks[name] = {{"shape", t.shape}, {"data", t.data}};
    }
    j["blocks"] = blocks;
    j["adam"] = {{"lr", ck.adam.lr},       {"lr_decay", ck.adam.lr_decay},
                 {"beta1", ck.adam.beta1}, {"beta2", ck.adam.beta2},
                 {"eps", ck.adam.eps},     {"step", ck.adam.step},
                 {"m", ck.adam.m},         {"v", ck.adam.v}};
    j["norm"] = {{"mean", ck.stats.mean},
                 {"std", ck.stats.std_dev},
                 {"degenerate", ck.stats.degenerate}};
    j["config"] = ck.config.to_json();
    j["config_hash"] = ck.config_hash;
    j["split_seed"] = ck.split_seed;
    j["epochs_run"] = ck.epochs_run;
    j["best_epoch"] = ck.best_epoch;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << j.dump(1) << "\n";
}

inline Checkpoint load_checkpoint(const std::string& path,
                                  std::optional<Arch> expected_arch = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("checkpoint parse error in " + path + ": " + e.what());
    }
    if (!j.contains("format") || j.at("format") != kCheckpointFormat) {
        throw DataError("not a recognized checkpoint: " + path);
    }
    Checkpoint ck;
    ck.params.arch = arch_from_name(j.at("arch").get<std::string>());
    if (expected_arch && ck.params.arch != *expected_arch) {
        throw ConfigError("checkpoint architecture " + arch_name(ck.params.arch) +
                          " does not match required " + arch_name(*expected_arch));
    }
    ck.params.input_dim = j.at("input_dim").get<int>();
    ck.params.num_classes = j.at("num_classes").get<int>();
    ck.params.hidden_dim = j.at("hidden_dim").get<int>();
    ck.params.latent_dim = j.at("latent_dim").get<int>();
    ck.params.eta = j.at("eta").get<double>();
    for (const auto& [name, bj] : j.at("blocks").items()) {
        Tensor t;
        t.shape = bj.at("shape").get<std::vector<std::size_t>>();
        t.data = bj.at("data").get<std::vector<double>>();
        std::size_t expect = 1;
        for (auto s : t.shape) expect *= s;
        if (t.data.size() != expect) {
            throw DataError("checkpoint block '" + name + "' shape/data mismatch");
        }
        t.check_finite(name);
        ck.params.blocks[name] = std::move(t);
    }
    const auto& aj = j.at("adam");
    ck.adam.lr = aj.at("lr").get<double>();
    ck.adam.lr_decay = aj.at("lr_decay").get<double>();
    ck.adam.beta1 = aj.at("beta1").get<double>();
    ck.adam.beta2 = aj.at("beta2").get<double>();
    ck.adam.eps = aj.at("eps").get<double>();
    ck.adam.step = aj.at("step").get<long>();
    ck.adam.m = aj.at("m").get<std::map<std::string, std::vector<double>>>();
    ck.adam.v = aj.at("v").get<std::map<std::string, std::vector<double>>>();
    const auto& nj = j.at("norm");
    ck.stats.mean = nj.at("mean").get<std::vector<double>>();
    ck.stats.std_dev = nj.at("std").get<std::vector<double>>();
    ck.stats.degenerate = nj.at("degenerate").get<BoolVec>();
    ck.config = RunConfig::from_json(j.at("config"));
    ck.config_hash = j.at("config_hash").get<std::string>();
    ck.split_seed = j.at("split_seed").get<unsigned long>();
    ck.epochs_run = j.at("epochs_run").get<int>();
    ck.best_epoch = j.at("best_epoch").get<int>();

    // sanity: the architecture must be reconstructible from the blocks
    std::mt19937_64 probe_rng(0);
    ModelParams probe =
        init_model(ck.params.arch, ck.params.input_dim, ck.params.num_classes,
                   ck.params.hidden_dim, ck.params.latent_dim, ck.params.eta,
                   probe_rng);
    for (const auto& [name, t] : probe.blocks) {
        auto it = ck.params.blocks.find(name);
        if (it == ck.params.blocks.end() || it->second.shape != t.shape) {
            throw DataError("checkpoint is missing or misshapes block '" + name + "'");
        }
    }
    return ck;
}

}  // namespace labdx
