#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "labdx/data.hpp"
#include "labdx/errors.hpp"
#include "labdx/models.hpp"

namespace labdx {

// All methods operate on normalized, zero-filled sequences, fill every
// missing entry, never touch observed entries, and return fully-observed
// sequences.

inline LabSequence impute_zero(const LabSequence& seq) {
    LabSequence out = seq;
    for (std::size_t t = 0; t < out.days(); ++t) {
        for (std::size_t m = 0; m < out.tests(); ++m) {
            if (!out.mask[t][m]) out.values[t][m] = 0.0;
            out.mask[t][m] = 1;
        }
    }
    return out;
}

// Interior gaps get the mean of the neighbouring observations; leading and
// trailing gaps carry the single available side; never-observed tests get 0.
inline LabSequence impute_last_next(const LabSequence& seq) {
    LabSequence out = seq;
    const std::size_t T = out.days();
    for (std::size_t m = 0; m < out.tests(); ++m) {
        for (std::size_t t = 0; t < T; ++t) {
            if (seq.mask[t][m]) continue;
            bool has_last = false, has_next = false;
            double last = 0.0, next = 0.0;
            for (std::size_t s = t; s-- > 0;) {
                if (seq.mask[s][m]) {
                    last = seq.values[s][m];
                    has_last = true;
                    break;
                }
            }
            for (std::size_t s = t + 1; s < T; ++s) {
                if (seq.mask[s][m]) {
                    next = seq.values[s][m];
                    has_next = true;
                    break;
                }
            }
            double v = 0.0;
            if (has_last && has_next) {
                v = 0.5 * (last + next);
            } else if (has_last) {
                v = last;
            } else if (has_next) {
                v = next;
            }
            out.values[t][m] = v;
        }
    }
    for (auto& row : out.mask) std::fill(row.begin(), row.end(), 1);
    return out;
}

// Mean of the test's observed values within the episode; never-observed -> 0.
inline LabSequence impute_row_mean(const LabSequence& seq) {
    LabSequence out = seq;
    for (std::size_t m = 0; m < out.tests(); ++m) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < out.days(); ++t) {
            if (seq.mask[t][m]) {
                sum += seq.values[t][m];
                ++count;
            }
        }
        const double mean = count == 0 ? 0.0 : sum / static_cast<double>(count);
        for (std::size_t t = 0; t < out.days(); ++t) {
            if (!seq.mask[t][m]) out.values[t][m] = mean;
        }
    }
    for (auto& row : out.mask) std::fill(row.begin(), row.end(), 1);
    return out;
}

// Next observation carried backward; trailing gaps carry the last observation
// forward; never-observed -> 0.
inline LabSequence impute_nocb(const LabSequence& seq) {
    LabSequence out = seq;
    const std::size_t T = out.days();
    for (std::size_t m = 0; m < out.tests(); ++m) {
        std::ptrdiff_t last_obs = -1;
        for (std::size_t t = 0; t < T; ++t) {
            if (seq.mask[t][m]) last_obs = static_cast<std::ptrdiff_t>(t);
        }
        double next = 0.0;
        for (std::size_t t = T; t-- > 0;) {
            if (seq.mask[t][m]) {
                next = seq.values[t][m];
            } else if (last_obs < 0) {
                out.values[t][m] = 0.0;  // never observed
            } else if (static_cast<std::ptrdiff_t>(t) > last_obs) {
                // trailing gap: carry the last observation forward
                out.values[t][m] = seq.values[last_obs][m];
            } else {
                out.values[t][m] = next;
            }
        }
    }
    for (auto& row : out.mask) std::fill(row.begin(), row.end(), 1);
    return out;
}

// Runs the trained recurrent model with posterior-mean latents and fills each
// missing coordinate with the decoder mean of that day.
inline LabSequence impute_model(const ModelParams& model, const LabSequence& seq) {
    if (model.arch != Arch::VRNN_NN) {
        throw ConfigError("impute_model: requires a vrnn_nn checkpoint, got " +
                          arch_name(model.arch));
    }
    // the network expects mean-imputed (zero-filled) inputs at missing
    // coordinates; enforce that here so stray content can never leak in
    LabSequence clean = seq;
    for (std::size_t t = 0; t < clean.days(); ++t) {
        for (std::size_t m = 0; m < clean.tests(); ++m) {
            if (!clean.mask[t][m]) clean.values[t][m] = 0.0;
        }
    }
    ForwardTrace trace = model_forward(model, make_example(clean));
    LabSequence out = seq;
    for (std::size_t t = 0; t < out.days(); ++t) {
        for (std::size_t m = 0; m < out.tests(); ++m) {
            if (!out.mask[t][m]) out.values[t][m] = trace.decoders[t].mu[m];
            out.mask[t][m] = 1;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Drop-and-score protocol
// ---------------------------------------------------------------------------

struct DropPlan {
    // (episode index, day, test) triples that were observed and are hidden
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> coordinates;
    double rate = 0.10;
    unsigned long seed = 0;
};

inline DropPlan make_drop_plan(const std::vector<LabSequence>& data, double rate,
                               unsigned long seed) {
    if (rate <= 0.0 || rate >= 1.0) {
        throw ConfigError("drop plan: rate must be in (0,1)");
    }
    DropPlan plan;
    plan.rate = rate;
    plan.seed = seed;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> observed;
    for (std::size_t n = 0; n < data.size(); ++n) {
        for (std::size_t t = 0; t < data[n].days(); ++t) {
            for (std::size_t m = 0; m < data[n].tests(); ++m) {
                if (data[n].mask[t][m]) observed.emplace_back(n, t, m);
            }
        }
    }
    std::mt19937_64 rng(seed);
    std::shuffle(observed.begin(), observed.end(), rng);
    const auto k = static_cast<std::size_t>(
        std::llround(rate * static_cast<double>(observed.size())));
    plan.coordinates.assign(observed.begin(), observed.begin() + k);
    return plan;
}

using ImputeFn = std::function<LabSequence(const LabSequence&)>;

// Hides the planned coordinates once, centrally, then scores a method's MSE
// on exactly those coordinates. Methods never see the hidden values.
inline double imputation_mse(const std::vector<LabSequence>& truth,
                             const DropPlan& plan, const ImputeFn& method) {
    std::vector<LabSequence> masked = truth;
    for (const auto& [n, t, m] : plan.coordinates) {
        masked[n].mask[t][m] = 0;
        masked[n].values[t][m] = 0.0;
    }
    std::vector<LabSequence> filled;
    filled.reserve(masked.size());
    for (const auto& s : masked) filled.push_back(method(s));
    double sse = 0.0;
    for (const auto& [n, t, m] : plan.coordinates) {
        const double r = filled[n].values[t][m] - truth[n].values[t][m];
        sse += r * r;
    }
    return sse / static_cast<double>(plan.coordinates.size());
}

struct ImputationRow {
    std::string method;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> per_seed;
};

inline ImputationRow summarize_row(std::string name, std::vector<double> mses) {
    ImputationRow row;
    row.method = std::move(name);
    row.per_seed = std::move(mses);
    for (double v : row.per_seed) row.mean += v;
    row.mean /= static_cast<double>(row.per_seed.size());
    double ss = 0.0;
    for (double v : row.per_seed) ss += (v - row.mean) * (v - row.mean);
    row.stddev = row.per_seed.size() > 1
                     ? std::sqrt(ss / static_cast<double>(row.per_seed.size() - 1))
                     : 0.0;
    return row;
}

// Scores the four heuristics plus the model over one drop plan per seed.
// Rows: zero, last&next, row mean, NOCB, model.
inline std::vector<ImputationRow> evaluate_imputation(
    const std::vector<LabSequence>& data, const ModelParams* model, double rate,
    const std::vector<unsigned long>& seeds) {
    std::vector<std::pair<std::string, ImputeFn>> methods = {
        {"zero", impute_zero},
        {"last&next", impute_last_next},
        {"row mean", impute_row_mean},
        {"NOCB", impute_nocb},
    };
    if (model) {
        methods.push_back(
            {"model", [model](const LabSequence& s) { return impute_model(*model, s); }});
    }
    std::vector<std::vector<double>> per_method(methods.size());
    for (unsigned long seed : seeds) {
        DropPlan plan = make_drop_plan(data, rate, seed);
        for (std::size_t i = 0; i < methods.size(); ++i) {
            per_method[i].push_back(imputation_mse(data, plan, methods[i].second));
        }
    }
    std::vector<ImputationRow> rows;
    for (std::size_t i = 0; i < methods.size(); ++i) {
        rows.push_back(summarize_row(methods[i].first, per_method[i]));
    }
    return rows;
}

}  // namespace labdx
