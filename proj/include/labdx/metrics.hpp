#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "labdx/errors.hpp"

namespace labdx {

struct PredictionSet {
    std::vector<std::vector<double>> probs;  // N x C, rows sum to 1
    std::vector<int> labels;                 // N true classes

    std::size_t size() const { return labels.size(); }
    std::size_t num_classes() const { return probs.empty() ? 0 : probs[0].size(); }

    void validate() const {
        if (labels.empty() || probs.size() != labels.size()) {
            throw DataError("PredictionSet: empty or inconsistent");
        }
        const std::size_t C = num_classes();
        for (std::size_t n = 0; n < probs.size(); ++n) {
            if (probs[n].size() != C) throw DataError("PredictionSet: ragged rows");
            double s = std::accumulate(probs[n].begin(), probs[n].end(), 0.0);
            if (std::abs(s - 1.0) > 1e-9) {
                throw DataError("PredictionSet: row " + std::to_string(n) +
                                " sums to " + std::to_string(s));
            }
            if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= C) {
                throw DataError("PredictionSet: label out of range");
            }
        }
    }
};

inline int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

struct PerClassRow {
    int cls = 0;
    double f1 = 0.0;
    double auc = 0.5;
    std::size_t support = 0;
    bool present = true;      // class appears in the true labels
    bool auc_defined = true;  // needs both positives and negatives
};

struct ScoreSet {
    double micro = 0.0;
    double macro = 0.0;
    double weighted = 0.0;
};

// Micro/macro/weighted F1 from argmax predictions (lowest index wins ties).
// Classes absent from the labels are excluded from macro averages.
inline ScoreSet f1_scores(const PredictionSet& preds,
                          std::vector<PerClassRow>* per_class = nullptr) {
    preds.validate();
    const std::size_t C = preds.num_classes();
    const std::size_t N = preds.size();
    std::vector<std::size_t> tp(C, 0), fp(C, 0), fn(C, 0), support(C, 0);
    for (std::size_t n = 0; n < N; ++n) {
        const int y = preds.labels[n];
        const int yhat = argmax_lowest(preds.probs[n]);
        ++support[y];
        if (y == yhat) {
            ++tp[y];
        } else {
            ++fp[yhat];
            ++fn[y];
        }
    }
    ScoreSet s;
    std::size_t tp_all = 0;
    double macro_sum = 0.0, weighted_sum = 0.0;
    std::size_t present = 0, present_support = 0;
    if (per_class) per_class->clear();
    for (std::size_t c = 0; c < C; ++c) {
        tp_all += tp[c];
        const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
        const double f1 = denom == 0 ? 0.0
                                     : 2.0 * static_cast<double>(tp[c]) /
                                           static_cast<double>(denom);
        if (support[c] > 0) {
            ++present;
            present_support += support[c];
            macro_sum += f1;
            weighted_sum += f1 * static_cast<double>(support[c]);
        }
        if (per_class) {
            per_class->push_back(
                {static_cast<int>(c), f1, 0.5, support[c], support[c] > 0, true});
        }
    }
    // single-label multiclass: pooled F1 equals accuracy
    s.micro = static_cast<double>(tp_all) / static_cast<double>(N);
    s.macro = present == 0 ? 0.0 : macro_sum / static_cast<double>(present);
    s.weighted = present_support == 0
                     ? 0.0
                     : weighted_sum / static_cast<double>(present_support);
    return s;
}

// One-vs-rest ROC AUC via midranks (ties counted half).
inline double binary_auc_midrank(const std::vector<double>& scores,
                                 const std::vector<std::uint8_t>& positive) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based midrank
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    double rank_pos = 0.0;
    std::size_t npos = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (positive[k]) {
            rank_pos += rank[k];
            ++npos;
        }
    }
    const std::size_t nneg = n - npos;
    if (npos == 0 || nneg == 0) throw NumericError("binary_auc: one class only");
    return (rank_pos - 0.5 * static_cast<double>(npos) *
                           static_cast<double>(npos + 1)) /
           (static_cast<double>(npos) * static_cast<double>(nneg));
}

inline ScoreSet auc_scores(const PredictionSet& preds,
                           std::vector<PerClassRow>* per_class = nullptr) {
    preds.validate();
    const std::size_t C = preds.num_classes();
    const std::size_t N = preds.size();
    ScoreSet s;

    // micro: flatten the N x C one-vs-rest binary matrix
    std::vector<double> flat_scores;
    std::vector<std::uint8_t> flat_pos;
    flat_scores.reserve(N * C);
    flat_pos.reserve(N * C);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t c = 0; c < C; ++c) {
            flat_scores.push_back(preds.probs[n][c]);
            flat_pos.push_back(preds.labels[n] == static_cast<int>(c) ? 1 : 0);
        }
    }
    s.micro = binary_auc_midrank(flat_scores, flat_pos);

    double macro_sum = 0.0, weighted_sum = 0.0;
    std::size_t defined = 0, defined_support = 0;
    if (per_class) {
        per_class->assign(C, {});
    }
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<double> sc(N);
        std::vector<std::uint8_t> pos(N);
        std::size_t support = 0;
        for (std::size_t n = 0; n < N; ++n) {
            sc[n] = preds.probs[n][c];
            pos[n] = preds.labels[n] == static_cast<int>(c) ? 1 : 0;
            support += pos[n];
        }
        const bool ok = support > 0 && support < N;
        double auc = 0.5;
        if (ok) {
            auc = binary_auc_midrank(sc, pos);
            ++defined;
            defined_support += support;
            macro_sum += auc;
            weighted_sum += auc * static_cast<double>(support);
        }
        if (per_class) {
            (*per_class)[c] = {static_cast<int>(c), 0.0,      auc,
                               support,              support > 0, ok};
        }
    }
    s.macro = defined == 0 ? 0.5 : macro_sum / static_cast<double>(defined);
    s.weighted = defined_support == 0
                     ? 0.5
                     : weighted_sum / static_cast<double>(defined_support);
    return s;
}

struct MetricsReport {
    double micro_f1 = 0.0, macro_f1 = 0.0, macro_f1_w = 0.0;
    double micro_auc = 0.5, macro_auc = 0.5, macro_auc_w = 0.5;
    std::vector<PerClassRow> per_class;
};

inline MetricsReport compute_metrics(const PredictionSet& preds) {
    MetricsReport rep;
    std::vector<PerClassRow> f1_rows, auc_rows;
    ScoreSet f = f1_scores(preds, &f1_rows);
    ScoreSet a = auc_scores(preds, &auc_rows);
    rep.micro_f1 = f.micro;
    rep.macro_f1 = f.macro;
    rep.macro_f1_w = f.weighted;
    rep.micro_auc = a.micro;
    rep.macro_auc = a.macro;
    rep.macro_auc_w = a.weighted;
    rep.per_class = f1_rows;
    for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
        rep.per_class[c].auc = auc_rows[c].auc;
        rep.per_class[c].auc_defined = auc_rows[c].auc_defined;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Paired t-test (two-sided) with p-values from the regularized incomplete
// beta function (continued fraction, ~1e-10 accuracy).
// ---------------------------------------------------------------------------

namespace detail {

inline double beta_cont_frac(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-14;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_cont_frac(a, b, x) / a;
    }
    const double ln_front2 = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             b * std::log(1.0 - x) + a * std::log(x);
    return 1.0 - std::exp(ln_front2) * detail::beta_cont_frac(b, a, 1.0 - x) / b;
}

inline double student_t_two_sided_p(double t, int df) {
    const double x = static_cast<double>(df) / (static_cast<double>(df) + t * t);
    return incomplete_beta(0.5 * df, 0.5, x);
}

inline std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    int df = 0;
    std::string stars;
    bool degenerate = false;  // zero variance with nonzero mean difference
};

inline TTestResult paired_t_test(const std::vector<double>& a,
                                 const std::vector<double>& b) {
    if (a.size() != b.size()) throw DataError("paired_t_test: length mismatch");
    if (a.size() < 2) throw DataError("paired_t_test: need at least 2 pairs");
    const std::size_t n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    TTestResult r;
    r.df = static_cast<int>(n) - 1;
    if (sd == 0.0) {
        if (mean == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
            r.degenerate = true;
        }
    } else {
        r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
        r.p = student_t_two_sided_p(r.t, r.df);
    }
    r.stars = significance_stars(r.p);
    return r;
}

// Per-class table (F1, AUC, support), plus a totals row; the CLI renders it.
inline std::string per_class_report(const PredictionSet& preds,
                                    const std::vector<std::string>& class_names = {}) {
    MetricsReport rep = compute_metrics(preds);
    std::ostringstream os;
    os << "class                     f1      auc  support\n";
    char buf[160];
    for (const auto& row : rep.per_class) {
        std::string name = static_cast<std::size_t>(row.cls) < class_names.size()
                               ? class_names[row.cls]
                               : "class_" + std::to_string(row.cls);
        if (!row.present) {
            std::snprintf(buf, sizeof buf, "%-22s %7s %8s %8zu  (no support)\n",
                          name.c_str(), "-", "-", row.support);
        } else if (!row.auc_defined) {
            std::snprintf(buf, sizeof buf, "%-22s %7.4f %8s %8zu  (auc skipped)\n",
                          name.c_str(), row.f1, "-", row.support);
        } else {
            std::snprintf(buf, sizeof buf, "%-22s %7.4f %8.4f %8zu\n", name.c_str(),
                          row.f1, row.auc, row.support);
        }
        os << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "%-22s %7.4f %8.4f %8zu  (micro-f1 / micro-auc)\n", "total",
                  rep.micro_f1, rep.micro_auc, preds.size());
    os << buf;
    return os.str();
}

}  // namespace labdx
