#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "labdx/adam.hpp"
#include "labdx/data.hpp"
#include "labdx/errors.hpp"
#include "labdx/graph.hpp"
#include "labdx/layers.hpp"
#include "labdx/prob.hpp"
#include "labdx/tensor.hpp"

namespace labdx {

enum class Arch { NN, AE_NN, VAE_NN, RNN_NN, VRNN_NN };

inline std::string arch_name(Arch a) {
    switch (a) {
        case Arch::NN: return "nn";
        case Arch::AE_NN: return "ae_nn";
        case Arch::VAE_NN: return "vae_nn";
        case Arch::RNN_NN: return "rnn_nn";
        case Arch::VRNN_NN: return "vrnn_nn";
    }
    return "?";
}

inline Arch arch_from_name(const std::string& s) {
    if (s == "nn") return Arch::NN;
    if (s == "ae_nn") return Arch::AE_NN;
    if (s == "vae_nn") return Arch::VAE_NN;
    if (s == "rnn_nn") return Arch::RNN_NN;
    if (s == "vrnn_nn") return Arch::VRNN_NN;
    throw ConfigError("unknown model architecture: " + s);
}

inline bool is_sequence_arch(Arch a) {
    return a == Arch::RNN_NN || a == Arch::VRNN_NN;
}

struct ModelParams {
    Arch arch = Arch::NN;
    int input_dim = 0;
    int num_classes = 0;
    int hidden_dim = 64;  // MLP hidden size and LSTM state size
    int latent_dim = 32;
    double eta = 0.5;
    ParamMap blocks;

    int classifier_input_dim() const {
        switch (arch) {
            case Arch::NN: return input_dim;
            case Arch::AE_NN:
            case Arch::VAE_NN: return latent_dim;
            case Arch::RNN_NN:
            case Arch::VRNN_NN: return hidden_dim;
        }
        return 0;
    }
};

namespace detail {

inline void add_dense(ParamMap& blocks, const std::string& prefix, std::size_t in,
                      std::size_t out, std::mt19937_64& rng) {
    Tensor W = Tensor::matrix(out, in);
    glorot_fill(W, in, out, rng);
    blocks[prefix + ".W"] = std::move(W);
    blocks[prefix + ".b"] = Tensor::vector(out);
}

inline void add_lstm(ParamMap& blocks, const std::string& prefix, std::size_t in,
                     std::size_t hidden, std::mt19937_64& rng) {
    LstmCell cell = LstmCell::init(in, hidden, rng);
    blocks[prefix + ".W"] = std::move(cell.W);
    blocks[prefix + ".b"] = std::move(cell.b);
}

}  // namespace detail

inline ModelParams init_model(Arch arch, int input_dim, int num_classes,
                              int hidden_dim, int latent_dim, double eta,
                              std::mt19937_64& rng) {
    if (eta < 0.0) throw ConfigError("init_model: eta must be >= 0");
    ModelParams p;
    p.arch = arch;
    p.input_dim = input_dim;
    p.num_classes = num_classes;
    p.hidden_dim = hidden_dim;
    p.latent_dim = latent_dim;
    p.eta = eta;
    const std::size_t M = input_dim, H = hidden_dim, L = latent_dim, C = num_classes;
    auto& b = p.blocks;
    switch (arch) {
        case Arch::NN:
            break;
        case Arch::AE_NN:
            detail::add_dense(b, "enc.h", M, H, rng);
            detail::add_dense(b, "enc.o", H, L, rng);
            detail::add_dense(b, "dec.h", L, H, rng);
            detail::add_dense(b, "dec.o", H, M, rng);
            break;
        case Arch::VAE_NN:
            detail::add_dense(b, "enc.h", M, H, rng);
            detail::add_dense(b, "enc.o", H, 2 * L, rng);
            detail::add_dense(b, "dec.h", L, H, rng);
            detail::add_dense(b, "dec.o", H, 2 * M, rng);
            break;
        case Arch::RNN_NN:
            detail::add_lstm(b, "rnn", M, H, rng);
            break;
        case Arch::VRNN_NN:
            detail::add_dense(b, "prior.h", H, H, rng);
            detail::add_dense(b, "prior.o", H, 2 * L, rng);
            detail::add_dense(b, "enc.h", M + H, H, rng);
            detail::add_dense(b, "enc.o", H, 2 * L, rng);
            detail::add_dense(b, "dec.h", L + H, H, rng);
            detail::add_dense(b, "dec.o", H, 2 * M, rng);
            detail::add_lstm(b, "rnn", M + L, H, rng);
            break;
    }
    const std::size_t clf_in = p.classifier_input_dim();
    detail::add_dense(b, "clf.h", clf_in, H, rng);
    detail::add_dense(b, "clf.o", H, C, rng);
    return p;
}

// ---------------------------------------------------------------------------
// Tape-backed forward passes
// ---------------------------------------------------------------------------

// Binds named parameter blocks onto a tape and tracks their node ids so
// gradients can be read back per block.
struct TapeModel {
    Tape& tp;
    const ModelParams& p;
    std::map<std::string, int> ids;

    TapeModel(Tape& t, const ModelParams& params) : tp(t), p(params) {}

    int id(const std::string& name) {
        auto it = ids.find(name);
        if (it != ids.end()) return it->second;
        auto bit = p.blocks.find(name);
        if (bit == p.blocks.end()) {
            throw NumericError("model block not found: " + name);
        }
        int node = tp.param(bit->second);
        ids.emplace(name, node);
        return node;
    }

    // Two-layer MLP with ReLU hidden activation.
    int mlp(const std::string& prefix, int x) {
        int h = tp.dense(id(prefix + ".h.W"), id(prefix + ".h.b"), x, Activation::Relu);
        return tp.dense(id(prefix + ".o.W"), id(prefix + ".o.b"), h,
                        Activation::Identity);
    }

    // Splits a 2D-dim head output into (mu, clamped log sigma).
    std::pair<int, int> gaussian_head(int out2d, std::size_t d) {
        int mu = tp.slice(out2d, 0, d);
        int ls = tp.clamp_slice(out2d, d, d, kLogSigmaMin, kLogSigmaMax);
        return {mu, ls};
    }

    std::vector<double> draw_noise(std::size_t d, std::mt19937_64* rng) {
        std::vector<double> eps(d, 0.0);
        if (rng) {
            std::normal_distribution<double> n01(0.0, 1.0);
            for (double& e : eps) e = n01(*rng);
        }
        return eps;
    }
};

struct Example {
    LabSequence seq;    // normalized, zero-filled
    MaskedVector avg;   // time-averaged features
};

inline Example make_example(const LabSequence& normalized) {
    return Example{normalized, average_sequence(normalized)};
}

// Per-step and pooled quantities of one forward pass.
struct ForwardTrace {
    std::vector<DiagGaussian> priors, posteriors, decoders;
    std::vector<LatentSample> latents;
    std::vector<std::vector<double>> hidden;
    std::vector<double> pooled;  // classifier input (x-bar, z, mu_z or h-bar)
    std::vector<double> probs;
    double disc_loss = 0.0;
    double gen_loss = 0.0;  // KL - loglik (or masked SSE for AE), 0 for NN/RNN
    double total_loss = 0.0;
};

namespace detail {

struct BuiltLoss {
    int loss = -1;
    int disc = -1;
    int gen = -1;
    int pooled = -1;
};

inline DiagGaussian node_gaussian(const Tape& tp, int mu, int ls) {
    DiagGaussian g;
    g.mu = tp.val(mu);
    g.sigma.resize(g.mu.size());
    for (std::size_t i = 0; i < g.sigma.size(); ++i) {
        g.sigma[i] = std::exp(tp.val(ls)[i]);
    }
    return g;
}

// Builds the full per-sample objective on the tape. When `rng` is null the
// latent is the posterior mean (evaluation mode). `disc_weight` of 0 trains
// the pure-generative variants.
inline BuiltLoss build_sample(Tape& tp, TapeModel& tm, const Example& ex,
                              std::mt19937_64* rng, double disc_weight,
                              ForwardTrace* trace) {
    const ModelParams& p = tm.p;
    const std::size_t M = p.input_dim, H = p.hidden_dim, L = p.latent_dim;
    BuiltLoss out;
    int gen = -1;

    switch (p.arch) {
        case Arch::NN: {
            int x = tp.leaf(ex.avg.values);
            out.pooled = x;
            out.disc = tp.softmax_ce(tm.mlp("clf", x), ex.seq.label,
                                     trace ? &trace->probs : nullptr);
            gen = tp.leaf({0.0});
            break;
        }
        case Arch::AE_NN: {
            int x = tp.leaf(ex.avg.values);
            int z = tm.mlp("enc", x);
            int xhat = tm.mlp("dec", z);
            out.pooled = z;
            out.disc = tp.softmax_ce(tm.mlp("clf", z), ex.seq.label,
                                     trace ? &trace->probs : nullptr);
            gen = tp.masked_sse(ex.avg.values, ex.avg.mask, xhat);
            break;
        }
        case Arch::VAE_NN: {
            int x = tp.leaf(ex.avg.values);
            auto [mu, ls] = tm.gaussian_head(tm.mlp("enc", x), L);
            out.pooled = mu;  // classifier consumes the posterior expectation
            out.disc = tp.softmax_ce(tm.mlp("clf", mu), ex.seq.label,
                                     trace ? &trace->probs : nullptr);
            std::vector<double> eps = tm.draw_noise(L, rng);
            int z = tp.reparam(mu, ls, eps);
            auto [xmu, xls] = tm.gaussian_head(tm.mlp("dec", z), M);
            int kl = tp.kl_standard(mu, ls);
            int ll = tp.masked_gauss_loglik(ex.avg.values, ex.avg.mask, xmu, xls);
            gen = tp.combine({{kl, 1.0}, {ll, -1.0}});
            if (trace) {
                trace->priors.push_back(DiagGaussian::standard(L));
                trace->posteriors.push_back(node_gaussian(tp, mu, ls));
                trace->decoders.push_back(node_gaussian(tp, xmu, xls));
                trace->latents.push_back(LatentSample{tp.val(z), eps});
            }
            break;
        }
        case Arch::RNN_NN: {
            int h = tp.leaf(std::vector<double>(H, 0.0));
            int c = tp.leaf(std::vector<double>(H, 0.0));
            std::vector<int> hs;
            for (std::size_t t = 0; t < ex.seq.days(); ++t) {
                int x = tp.leaf(ex.seq.values[t]);
                int hc = tp.lstm(M, H, tm.id("rnn.W"), tm.id("rnn.b"), x, h, c);
                h = tp.slice(hc, 0, H);
                c = tp.slice(hc, H, H);
                hs.push_back(h);
                if (trace) trace->hidden.push_back(tp.val(h));
            }
            int hbar = tp.mean_of(hs);
            out.pooled = hbar;
            out.disc = tp.softmax_ce(tm.mlp("clf", hbar), ex.seq.label,
                                     trace ? &trace->probs : nullptr);
            gen = tp.leaf({0.0});
            break;
        }
        case Arch::VRNN_NN: {
            int h = tp.leaf(std::vector<double>(H, 0.0));
            int c = tp.leaf(std::vector<double>(H, 0.0));
            std::vector<int> hs;
            std::vector<std::pair<int, double>> terms;
            for (std::size_t t = 0; t < ex.seq.days(); ++t) {
                int x = tp.leaf(ex.seq.values[t]);
                auto [pmu, pls] = tm.gaussian_head(tm.mlp("prior", h), L);
                auto [qmu, qls] = tm.gaussian_head(tm.mlp("enc", tp.concat(x, h)), L);
                std::vector<double> eps = tm.draw_noise(L, rng);
                int z = rng ? tp.reparam(qmu, qls, eps) : qmu;
                auto [xmu, xls] = tm.gaussian_head(tm.mlp("dec", tp.concat(z, h)), M);
                int kl = tp.kl_diag(qmu, qls, pmu, pls);
                int ll = tp.masked_gauss_loglik(ex.seq.values[t], ex.seq.mask[t], xmu,
                                                xls);
                terms.push_back({kl, 1.0});
                terms.push_back({ll, -1.0});
                int hc = tp.lstm(M + L, H, tm.id("rnn.W"), tm.id("rnn.b"),
                                 tp.concat(x, z), h, c);
                h = tp.slice(hc, 0, H);
                c = tp.slice(hc, H, H);
                hs.push_back(h);
                if (trace) {
                    trace->priors.push_back(node_gaussian(tp, pmu, pls));
                    trace->posteriors.push_back(node_gaussian(tp, qmu, qls));
                    trace->decoders.push_back(node_gaussian(tp, xmu, xls));
                    trace->latents.push_back(LatentSample{tp.val(z), eps});
                    trace->hidden.push_back(tp.val(h));
                }
            }
            int hbar = tp.mean_of(hs);
            out.pooled = hbar;
            out.disc = tp.softmax_ce(tm.mlp("clf", hbar), ex.seq.label,
                                     trace ? &trace->probs : nullptr);
            gen = tp.combine(terms);
            break;
        }
    }
    out.gen = gen;
    out.loss = tp.combine({{out.disc, disc_weight}, {gen, p.eta}});
    if (trace) {
        trace->pooled = tp.val(out.pooled);
        trace->disc_loss = tp.val(out.disc)[0];
        trace->gen_loss = tp.val(gen)[0];
        trace->total_loss = tp.val(out.loss)[0];
    }
    return out;
}

}  // namespace detail

// Evaluation-style forward pass. With rng null the latent is the posterior
// mean and the pass is deterministic.
inline ForwardTrace model_forward(const ModelParams& p, const Example& ex,
                                  std::mt19937_64* rng = nullptr,
                                  double disc_weight = 1.0) {
    Tape tp;
    TapeModel tm(tp, p);
    ForwardTrace trace;
    detail::build_sample(tp, tm, ex, rng, disc_weight, &trace);
    return trace;
}

// Deterministic feature vector: E(z|x) for the VAE family, z for AE, pooled
// hidden state for the recurrent family, the averaged input for NN.
inline std::vector<double> extract_features(const ModelParams& p, const Example& ex) {
    return model_forward(p, ex).pooled;
}

struct BatchStats {
    double loss = 0.0;
    double disc = 0.0;
    double gen = 0.0;
};

// Mean loss over the batch; gradients (of the mean) accumulate into `grads`,
// which is reset to zero-shaped blocks first.
inline BatchStats model_batch_gradients(const ModelParams& p,
                                        const std::vector<const Example*>& batch,
                                        std::mt19937_64* rng, double disc_weight,
                                        GradMap& grads) {
    grads.clear();
    for (const auto& [name, t] : p.blocks) grads[name].assign(t.size(), 0.0);
    BatchStats stats;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (const Example* ex : batch) {
        Tape tp;
        TapeModel tm(tp, p);
        detail::BuiltLoss bl = detail::build_sample(tp, tm, *ex, rng, disc_weight,
                                                    nullptr);
        stats.loss += tp.val(bl.loss)[0] * inv;
        stats.disc += tp.val(bl.disc)[0] * inv;
        stats.gen += tp.val(bl.gen)[0] * inv;
        tp.backward(bl.loss);
        for (const auto& [name, node] : tm.ids) {
            const auto& g = tp.grad(node);
            auto& acc = grads[name];
            for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] * inv;
        }
    }
    return stats;
}

}  // namespace labdx
