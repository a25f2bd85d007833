#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "labdx/adam.hpp"
#include "labdx/data.hpp"
#include "labdx/errors.hpp"
#include "labdx/metrics.hpp"
#include "labdx/models.hpp"

namespace labdx {

struct TrainConfig {
    double lr = 0.0005;
    double lr_decay = 0.99;  // multiplicative per epoch
    int batch_size = 64;
    int max_epochs = 100;
    int patience = 10;  // early stopping on dev macro-F1
    double eta = 0.5;
    double disc_weight = 1.0;  // 0 trains the pure-generative variants
    double clip_norm = 5.0;
    int hidden_dim = 64;
    int latent_dim = 32;
    unsigned long seed = 0;
};

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;
    double disc = 0.0;
    double gen = 0.0;
    double dev_score = 0.0;
    double lr = 0.0;
    double max_grad_norm = 0.0;
    bool improved = false;
};

struct TrainResult {
    ModelParams params;  // best-dev parameters
    AdamState adam;
    std::vector<EpochLog> log;
    int best_epoch = -1;
    double best_dev = 0.0;
    int epochs_run = 0;
};

inline std::vector<Example> make_examples(const std::vector<LabSequence>& normalized) {
    std::vector<Example> out;
    out.reserve(normalized.size());
    for (const auto& s : normalized) out.push_back(make_example(s));
    return out;
}

inline PredictionSet predict_all(const ModelParams& p,
                                 const std::vector<Example>& examples) {
    PredictionSet preds;
    for (const auto& ex : examples) {
        preds.probs.push_back(model_forward(p, ex).probs);
        preds.labels.push_back(ex.seq.label);
    }
    return preds;
}

inline double mean_total_loss(const ModelParams& p, const std::vector<Example>& exs,
                              double disc_weight) {
    double sum = 0.0;
    for (const auto& ex : exs) {
        sum += model_forward(p, ex, nullptr, disc_weight).total_loss;
    }
    return sum / static_cast<double>(exs.size());
}

namespace detail {

inline unsigned long mix_seed(unsigned long seed, unsigned long a, unsigned long b) {
    unsigned long h = seed;
    h ^= (a + 0x9e3779b97f4a7c15UL) + (h << 6) + (h >> 2);
    h ^= (b + 0x9e3779b97f4a7c15UL) + (h << 6) + (h >> 2);
    return h;
}

}  // namespace detail

// Deterministic minibatch training with Adam, per-epoch learning-rate decay,
// gradient clipping and dev-set early stopping. The dev score is macro-F1, or
// negative dev loss when the discriminative term is disabled.
inline TrainResult train_model(Arch arch, const std::vector<Example>& train,
                               const std::vector<Example>& dev, int num_classes,
                               const TrainConfig& cfg,
                               std::optional<ModelParams> resume_params = {},
                               std::optional<AdamState> resume_adam = {},
                               int start_epoch = 0) {
    if (train.empty() || dev.empty()) throw DataError("train_model: empty split");
    const int input_dim = static_cast<int>(train[0].avg.values.size());

    TrainResult res;
    if (resume_params) {
        res.params = std::move(*resume_params);
    } else {
        std::mt19937_64 init_rng(cfg.seed);
        res.params = init_model(arch, input_dim, num_classes, cfg.hidden_dim,
                                cfg.latent_dim, cfg.eta, init_rng);
    }
    ModelParams current = res.params;
    AdamState adam;
    if (resume_adam) {
        adam = std::move(*resume_adam);
    } else {
        adam.lr = cfg.lr;
        adam.lr_decay = cfg.lr_decay;
    }

    const bool supervised = cfg.disc_weight > 0.0;
    double best = -1e300;
    int best_epoch = -1;
    int since_improved = 0;

    for (int epoch = start_epoch; epoch < cfg.max_epochs; ++epoch) {
        std::vector<std::size_t> order(train.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::mt19937_64 shuffle_rng(detail::mix_seed(cfg.seed, epoch, 0xA11CE));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        EpochLog log;
        log.epoch = epoch;
        log.lr = cfg.lr * std::pow(cfg.lr_decay, epoch);
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size, ++batches) {
            std::vector<const Example*> batch;
            for (std::size_t i = start;
                 i < std::min(order.size(), start + cfg.batch_size); ++i) {
                batch.push_back(&train[order[i]]);
            }
            std::mt19937_64 noise_rng(detail::mix_seed(cfg.seed, epoch, batches));
            GradMap grads;
            BatchStats st = model_batch_gradients(current, batch, &noise_rng,
                                                  cfg.disc_weight, grads);
            if (!std::isfinite(st.loss)) {
                throw NumericError("train_model: non-finite loss in epoch " +
                                   std::to_string(epoch) + " batch " +
                                   std::to_string(batches));
            }
            log.loss += st.loss * batch.size();
            log.disc += st.disc * batch.size();
            log.gen += st.gen * batch.size();
            log.max_grad_norm =
                std::max(log.max_grad_norm, clip_global_norm(grads, cfg.clip_norm));
            adam.update(current.blocks, grads, epoch);
        }
        log.loss /= static_cast<double>(train.size());
        log.disc /= static_cast<double>(train.size());
        log.gen /= static_cast<double>(train.size());

        if (supervised) {
            log.dev_score = f1_scores(predict_all(current, dev)).macro;
        } else {
            log.dev_score = -mean_total_loss(current, dev, cfg.disc_weight);
        }
        if (log.dev_score > best) {
            best = log.dev_score;
            best_epoch = epoch;
            res.params = current;
            res.adam = adam;
            since_improved = 0;
            log.improved = true;
        } else {
            ++since_improved;
        }
        res.log.push_back(log);
        res.epochs_run = epoch + 1;
        if (since_improved >= cfg.patience) break;
    }
    res.best_epoch = best_epoch;
    res.best_dev = best;
    return res;
}

// ---------------------------------------------------------------------------
// Preprocessing pipeline: truncate -> split -> fit on train -> normalize
// ---------------------------------------------------------------------------

struct PreparedSplit {
    std::vector<Example> train, dev, test;
    NormStats stats;
    unsigned long split_seed = 0;
};

inline PreparedSplit prepare_split(const std::vector<LabSequence>& raw,
                                   unsigned long split_seed,
                                   std::size_t max_days = 100) {
    std::vector<LabSequence> trunc;
    trunc.reserve(raw.size());
    for (const auto& s : raw) trunc.push_back(truncate_latest(s, max_days));
    DatasetSplit split = split_dataset(trunc, split_seed);
    PreparedSplit out;
    out.split_seed = split_seed;
    out.stats = fit_normalization(split.train);
    auto normalize_all = [&](const std::vector<LabSequence>& in) {
        std::vector<Example> exs;
        exs.reserve(in.size());
        for (const auto& s : in) exs.push_back(make_example(apply_normalization(s, out.stats)));
        return exs;
    };
    out.train = normalize_all(split.train);
    out.dev = normalize_all(split.dev);
    out.test = normalize_all(split.test);
    return out;
}

}  // namespace labdx
