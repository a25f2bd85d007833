#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "labdx/data.hpp"
#include "labdx/errors.hpp"

namespace labdx {

// Class-conditioned linear-Gaussian state-space generator. Classes share the
// emission matrix; class identity enters through a weak static offset and a
// class-specific latent rotation rate, so temporal models have more signal to
// exploit than static ones.
struct SynthConfig {
    int num_classes = 4;
    int num_tests = 10;
    int t_min = 5;
    int t_max = 20;
    int num_episodes = 2000;
    double missing_rate = 0.54;
    int latent_dim = 3;
    double temporal_strength = 1.0;  // scales the class rotation rates
    double offset_scale = 0.3;       // static class separability
    double damping = 0.95;
    double obs_noise = 0.3;
};

inline std::vector<LabSequence> synth_generate(const SynthConfig& cfg,
                                               unsigned long seed) {
    if (cfg.missing_rate < 0.0 || cfg.missing_rate >= 1.0) {
        throw ConfigError("synth_generate: missing_rate must be in [0,1)");
    }
    if (cfg.num_classes < 1 || cfg.num_tests < 1 || cfg.latent_dim < 2 ||
        cfg.t_min < 2 || cfg.t_max < cfg.t_min || cfg.num_episodes < 1) {
        throw ConfigError("synth_generate: invalid generator configuration");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const int K = cfg.latent_dim;
    const int M = cfg.num_tests;
    const int C = cfg.num_classes;

    // Shared emission, unit-scale rows.
    std::vector<std::vector<double>> emit(M, std::vector<double>(K));
    for (auto& row : emit) {
        for (double& v : row) v = n01(rng) / std::sqrt(static_cast<double>(K));
    }
    // Per-class offsets and rotation rates.
    std::vector<std::vector<double>> offset(C, std::vector<double>(M));
    std::vector<double> omega(C);
    for (int c = 0; c < C; ++c) {
        for (double& v : offset[c]) v = cfg.offset_scale * n01(rng);
        omega[c] = cfg.temporal_strength *
                   (0.15 + 0.9 * static_cast<double>(c) / static_cast<double>(C));
    }

    const double state_noise = std::sqrt(1.0 - cfg.damping * cfg.damping);
    std::vector<LabSequence> out;
    out.reserve(cfg.num_episodes);
    for (int n = 0; n < cfg.num_episodes; ++n) {
        LabSequence seq;
        char buf[32];
        std::snprintf(buf, sizeof buf, "synth-%06d", n);
        seq.episode_id = buf;
        const int c = static_cast<int>(rng() % static_cast<unsigned long>(C));
        seq.label = c;
        const int T =
            cfg.t_min + static_cast<int>(rng() % static_cast<unsigned long>(
                                             cfg.t_max - cfg.t_min + 1));

        std::vector<double> z(K);
        for (double& v : z) v = n01(rng);
        const double cw = std::cos(omega[c]), sw = std::sin(omega[c]);
        std::size_t observed = 0;
        for (int t = 0; t < T; ++t) {
            if (t > 0) {
                // damped rotation in the first two latent dims, damping elsewhere
                const double z0 = z[0], z1 = z[1];
                z[0] = cfg.damping * (cw * z0 - sw * z1);
                z[1] = cfg.damping * (sw * z0 + cw * z1);
                for (int k = 2; k < K; ++k) z[k] *= cfg.damping;
                for (int k = 0; k < K; ++k) z[k] += state_noise * n01(rng);
            }
            std::vector<double> row(M);
            BoolVec mask(M, 0);
            for (int m = 0; m < M; ++m) {
                double v = offset[c][m] + cfg.obs_noise * n01(rng);
                for (int k = 0; k < K; ++k) v += emit[m][k] * z[k];
                row[m] = v;
                if (u01(rng) >= cfg.missing_rate) {
                    mask[m] = 1;
                    ++observed;
                }
            }
            seq.values.push_back(std::move(row));
            seq.mask.push_back(std::move(mask));
        }
        if (observed == 0) {
            seq.mask[0][0] = 1;  // keep the at-least-one-observation invariant
        }
        out.push_back(std::move(seq));
    }
    return out;
}

inline double empirical_missing_rate(const std::vector<LabSequence>& seqs) {
    std::size_t total = 0, missing = 0;
    for (const auto& s : seqs) {
        for (const auto& row : s.mask) {
            for (auto m : row) {
                ++total;
                if (!m) ++missing;
            }
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(total);
}

}  // namespace labdx
