#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "labdx/errors.hpp"
#include "labdx/tensor.hpp"

namespace labdx {

enum class Activation { Identity, Relu };

inline double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

inline void glorot_fill(Tensor& w, std::size_t fan_in, std::size_t fan_out,
                        std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-glorot_limit(fan_in, fan_out),
                                                glorot_limit(fan_in, fan_out));
    for (double& v : w.data) v = dist(rng);
}

// Numerically stable softmax (max subtraction).
inline std::vector<double> softmax(const std::vector<double>& logits) {
    for (double v : logits) {
        if (!std::isfinite(v)) throw NumericError("softmax: non-finite logit");
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

// ---------------------------------------------------------------------------
// Dense layer. Raw kernels are shared between the eager API and the tape ops.
// ---------------------------------------------------------------------------

// y = act(W x + b); `pre` receives the preactivation when non-null.
inline void dense_forward_raw(const double* W, const double* b, std::size_t out_dim,
                              std::size_t in_dim, const double* x, Activation act,
                              double* y, double* pre) {
    for (std::size_t o = 0; o < out_dim; ++o) {
        double s = b[o];
        const double* wrow = W + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) s += wrow[i] * x[i];
        if (pre) pre[o] = s;
        y[o] = (act == Activation::Relu && s < 0.0) ? 0.0 : s;
    }
}

// Accumulates into dx/dW/db (any may be null).
inline void dense_backward_raw(const double* W, std::size_t out_dim, std::size_t in_dim,
                               const double* x, const double* pre, Activation act,
                               const double* dy, double* dx, double* dW, double* db) {
    for (std::size_t o = 0; o < out_dim; ++o) {
        double g = dy[o];
        if (act == Activation::Relu && pre[o] <= 0.0) g = 0.0;
        if (db) db[o] += g;
        const double* wrow = W + o * in_dim;
        double* dwrow = dW ? dW + o * in_dim : nullptr;
        for (std::size_t i = 0; i < in_dim; ++i) {
            if (dwrow) dwrow[i] += g * x[i];
            if (dx) dx[i] += g * wrow[i];
        }
    }
}

struct DenseLayer {
    Tensor W;  // out x in
    Tensor b;  // out
    Activation act = Activation::Identity;

    std::size_t in_dim() const { return W.cols(); }
    std::size_t out_dim() const { return W.rows(); }

    static DenseLayer init(std::size_t in, std::size_t out, Activation act,
                           std::mt19937_64& rng) {
        DenseLayer l;
        l.W = Tensor::matrix(out, in);
        l.b = Tensor::vector(out);
        l.act = act;
        glorot_fill(l.W, in, out, rng);
        return l;
    }

    void check_input(std::size_t n, const char* who) const {
        if (n != in_dim()) {
            throw NumericError(std::string(who) + ": input dim " + std::to_string(n) +
                               " != layer in dim " + std::to_string(in_dim()));
        }
    }

    std::vector<double> forward(const std::vector<double>& x,
                                std::vector<double>* pre = nullptr) const {
        check_input(x.size(), "dense_forward");
        std::vector<double> y(out_dim());
        if (pre) pre->resize(out_dim());
        dense_forward_raw(W.data.data(), b.data.data(), out_dim(), in_dim(), x.data(),
                          act, y.data(), pre ? pre->data() : nullptr);
        return y;
    }

    // Returns (dx, dW, db) for upstream gradient dy.
    void backward(const std::vector<double>& x, const std::vector<double>& pre,
                  const std::vector<double>& dy, std::vector<double>& dx, Tensor& dW,
                  Tensor& db) const {
        check_input(x.size(), "dense_backward");
        if (dy.size() != out_dim()) throw NumericError("dense_backward: dy dim mismatch");
        dx.assign(in_dim(), 0.0);
        dW = Tensor::matrix(out_dim(), in_dim());
        db = Tensor::vector(out_dim());
        dense_backward_raw(W.data.data(), out_dim(), in_dim(), x.data(), pre.data(), act,
                           dy.data(), dx.data(), dW.data.data(), db.data.data());
    }
};

// ---------------------------------------------------------------------------
// LSTM cell. Gate rows in W/b are ordered [input, forget, output, candidate].
// ---------------------------------------------------------------------------

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmCache {
    std::vector<double> v;        // [x, h_prev], in+H
    std::vector<double> i, f, o, g;  // gate activations, H each
    std::vector<double> c_prev, c_new, tanh_c;
};

struct LstmCell {
    Tensor W;  // 4H x (in + H)
    Tensor b;  // 4H
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;

    static LstmCell init(std::size_t in, std::size_t hidden, std::mt19937_64& rng) {
        LstmCell c;
        c.input_dim = in;
        c.hidden_dim = hidden;
        c.W = Tensor::matrix(4 * hidden, in + hidden);
        c.b = Tensor::vector(4 * hidden);
        glorot_fill(c.W, in + hidden, hidden, rng);
        // forget-gate bias +1
        for (std::size_t k = 0; k < hidden; ++k) c.b[hidden + k] = 1.0;
        return c;
    }

    void step(const std::vector<double>& x, const std::vector<double>& h_prev,
              const std::vector<double>& c_prev, std::vector<double>& h_out,
              std::vector<double>& c_out, LstmCache* cache = nullptr) const {
        step_raw(W.data.data(), b.data.data(), x, h_prev, c_prev, h_out, c_out, cache);
    }

    void step_raw(const double* Wd, const double* bd, const std::vector<double>& x,
                  const std::vector<double>& h_prev, const std::vector<double>& c_prev,
                  std::vector<double>& h_out, std::vector<double>& c_out,
                  LstmCache* cache) const {
        const std::size_t H = hidden_dim;
        if (x.size() != input_dim || h_prev.size() != H || c_prev.size() != H) {
            throw NumericError("lstm_step: shape mismatch (x=" + std::to_string(x.size()) +
                               ", h=" + std::to_string(h_prev.size()) + ")");
        }
        const std::size_t vin = input_dim + H;
        std::vector<double> v(vin);
        std::copy(x.begin(), x.end(), v.begin());
        std::copy(h_prev.begin(), h_prev.end(), v.begin() + input_dim);

        std::vector<double> a(4 * H);
        for (std::size_t r = 0; r < 4 * H; ++r) {
            double s = bd[r];
            const double* wrow = Wd + r * vin;
            for (std::size_t j = 0; j < vin; ++j) s += wrow[j] * v[j];
            a[r] = s;
        }
        std::vector<double> gi(H), gf(H), go(H), gg(H), tc(H);
        h_out.resize(H);
        c_out.resize(H);
        for (std::size_t k = 0; k < H; ++k) {
            gi[k] = sigmoid(a[k]);
            gf[k] = sigmoid(a[H + k]);
            go[k] = sigmoid(a[2 * H + k]);
            gg[k] = std::tanh(a[3 * H + k]);
            c_out[k] = gf[k] * c_prev[k] + gi[k] * gg[k];
            tc[k] = std::tanh(c_out[k]);
            h_out[k] = go[k] * tc[k];
        }
        if (cache) {
            cache->v = std::move(v);
            cache->i = std::move(gi);
            cache->f = std::move(gf);
            cache->o = std::move(go);
            cache->g = std::move(gg);
            cache->c_prev = c_prev;
            cache->c_new = c_out;
            cache->tanh_c = std::move(tc);
        }
    }

    // Accumulates into the output gradient buffers (all pre-sized, may hold
    // prior contributions).
    void backward_raw(const double* Wd, const LstmCache& cc,
                      const std::vector<double>& dh, const std::vector<double>& dc_ext,
                      double* dx, double* dh_prev, double* dc_prev, double* dW,
                      double* db) const {
        const std::size_t H = hidden_dim;
        const std::size_t vin = input_dim + H;
        std::vector<double> da(4 * H);
        for (std::size_t k = 0; k < H; ++k) {
            double d_o = dh[k] * cc.tanh_c[k];
            double dct = dc_ext[k] + dh[k] * cc.o[k] * (1.0 - cc.tanh_c[k] * cc.tanh_c[k]);
            double d_i = dct * cc.g[k];
            double d_f = dct * cc.c_prev[k];
            double d_g = dct * cc.i[k];
            if (dc_prev) dc_prev[k] += dct * cc.f[k];
            da[k] = d_i * cc.i[k] * (1.0 - cc.i[k]);
            da[H + k] = d_f * cc.f[k] * (1.0 - cc.f[k]);
            da[2 * H + k] = d_o * cc.o[k] * (1.0 - cc.o[k]);
            da[3 * H + k] = d_g * (1.0 - cc.g[k] * cc.g[k]);
        }
        for (std::size_t r = 0; r < 4 * H; ++r) {
            double g = da[r];
            if (db) db[r] += g;
            const double* wrow = Wd + r * vin;
            double* dwrow = dW ? dW + r * vin : nullptr;
            for (std::size_t j = 0; j < vin; ++j) {
                if (dwrow) dwrow[j] += g * cc.v[j];
                double dv = g * wrow[j];
                if (j < input_dim) {
                    if (dx) dx[j] += dv;
                } else if (dh_prev) {
                    dh_prev[j - input_dim] += dv;
                }
            }
        }
    }

    void backward(const LstmCache& cc, const std::vector<double>& dh,
                  const std::vector<double>& dc, std::vector<double>& dx,
                  std::vector<double>& dh_prev, std::vector<double>& dc_prev, Tensor& dW,
                  Tensor& db) const {
        dx.assign(input_dim, 0.0);
        dh_prev.assign(hidden_dim, 0.0);
        dc_prev.assign(hidden_dim, 0.0);
        dW = Tensor::matrix(4 * hidden_dim, input_dim + hidden_dim);
        db = Tensor::vector(4 * hidden_dim);
        backward_raw(W.data.data(), cc, dh, dc, dx.data(), dh_prev.data(),
                     dc_prev.data(), dW.data.data(), db.data.data());
    }
};

}  // namespace labdx
