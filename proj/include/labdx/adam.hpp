#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "labdx/errors.hpp"
#include "labdx/tensor.hpp"

namespace labdx {

using ParamMap = std::map<std::string, Tensor>;
using GradMap = std::map<std::string, std::vector<double>>;

// Rescales gradients so their global L2 norm is at most `max_norm`.
// Returns the pre-clip norm.
inline double clip_global_norm(GradMap& grads, double max_norm) {
    double sq = 0.0;
    for (auto& [name, g] : grads) {
        for (double v : g) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for (auto& [name, g] : grads) {
            for (double& v : g) v *= scale;
        }
    }
    return norm;
}

struct AdamState {
    double lr = 0.0005;
    double lr_decay = 0.99;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::map<std::string, std::vector<double>> m, v;

    // One Adam update with bias correction; the effective learning rate is
    // lr * lr_decay^epoch.
    void update(ParamMap& params, const GradMap& grads, int epoch) {
        ++step;
        const double eff_lr = lr * std::pow(lr_decay, epoch);
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (auto& [name, p] : params) {
            auto git = grads.find(name);
            if (git == grads.end()) continue;
            const auto& g = git->second;
            if (g.size() != p.size()) {
                throw NumericError("adam_step: gradient shape mismatch for '" + name +
                                   "'");
            }
            auto& mm = m[name];
            auto& vv = v[name];
            if (mm.empty()) mm.assign(p.size(), 0.0);
            if (vv.empty()) vv.assign(p.size(), 0.0);
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (!std::isfinite(g[i])) {
                    throw NumericError("adam_step: non-finite gradient in block '" +
                                       name + "'");
                }
                mm[i] = beta1 * mm[i] + (1.0 - beta1) * g[i];
                vv[i] = beta2 * vv[i] + (1.0 - beta2) * g[i] * g[i];
                const double mhat = mm[i] / bc1;
                const double vhat = vv[i] / bc2;
                p.data[i] -= eff_lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }
};

}  // namespace labdx
