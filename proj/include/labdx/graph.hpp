#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "labdx/errors.hpp"
#include "labdx/layers.hpp"
#include "labdx/prob.hpp"
#include "labdx/tensor.hpp"

namespace labdx {

// Dynamic reverse-mode tape over vector-valued nodes. Ops record backward
// closures; creation order is a valid topological order.
class Tape {
public:
    int leaf(std::vector<double> v) { return add(std::move(v), {}); }

    int param(const Tensor& t) { return add(t.data, {}); }

    const std::vector<double>& val(int id) const { return nodes_[id].val; }
    const std::vector<double>& grad(int id) const { return nodes_[id].grad; }

    int dense(int W, int b, int x, Activation act) {
        const std::size_t in = nodes_[x].val.size();
        const std::size_t out = nodes_[b].val.size();
        if (nodes_[W].val.size() != in * out) {
            throw NumericError("tape dense: W size " +
                               std::to_string(nodes_[W].val.size()) + " != " +
                               std::to_string(out) + "x" + std::to_string(in));
        }
        std::vector<double> y(out), pre(out);
        dense_forward_raw(nodes_[W].val.data(), nodes_[b].val.data(), out, in,
                          nodes_[x].val.data(), act, y.data(), pre.data());
        int id = add(std::move(y), [this, W, b, x, act, in, out, pre](int self) {
            dense_backward_raw(nodes_[W].val.data(), out, in, nodes_[x].val.data(),
                               pre.data(), act, nodes_[self].grad.data(),
                               nodes_[x].grad.data(), nodes_[W].grad.data(),
                               nodes_[b].grad.data());
        });
        return id;
    }

    // Returns a node holding [h; c] of length 2H.
    int lstm(std::size_t input_dim, std::size_t hidden_dim, int W, int b, int x,
             int h_prev, int c_prev) {
        const std::size_t H = hidden_dim;
        LstmCell view;  // dims only; weights read from the tape nodes
        view.input_dim = input_dim;
        view.hidden_dim = hidden_dim;
        std::vector<double> h, c;
        LstmCache cache;
        view.step_raw(nodes_[W].val.data(), nodes_[b].val.data(), nodes_[x].val,
                      nodes_[h_prev].val, nodes_[c_prev].val, h, c, &cache);
        std::vector<double> hc(2 * H);
        std::copy(h.begin(), h.end(), hc.begin());
        std::copy(c.begin(), c.end(), hc.begin() + H);
        int id = add(std::move(hc),
                     [this, view, W, b, x, h_prev, c_prev, cache, H](int self) {
                         const auto& g = nodes_[self].grad;
                         std::vector<double> dh(g.begin(), g.begin() + H);
                         std::vector<double> dc(g.begin() + H, g.end());
                         view.backward_raw(nodes_[W].val.data(), cache, dh, dc,
                                           nodes_[x].grad.data(),
                                           nodes_[h_prev].grad.data(),
                                           nodes_[c_prev].grad.data(),
                                           nodes_[W].grad.data(),
                                           nodes_[b].grad.data());
                     });
        return id;
    }

    int slice(int x, std::size_t off, std::size_t len) {
        std::vector<double> v(nodes_[x].val.begin() + off,
                              nodes_[x].val.begin() + off + len);
        return add(std::move(v), [this, x, off, len](int self) {
            for (std::size_t k = 0; k < len; ++k) {
                nodes_[x].grad[off + k] += nodes_[self].grad[k];
            }
        });
    }

    int concat(int a, int b) {
        std::vector<double> v = nodes_[a].val;
        v.insert(v.end(), nodes_[b].val.begin(), nodes_[b].val.end());
        const std::size_t na = nodes_[a].val.size();
        return add(std::move(v), [this, a, b, na](int self) {
            const auto& g = nodes_[self].grad;
            for (std::size_t k = 0; k < na; ++k) nodes_[a].grad[k] += g[k];
            for (std::size_t k = na; k < g.size(); ++k) nodes_[b].grad[k - na] += g[k];
        });
    }

    int mean_of(std::vector<int> xs) {
        const std::size_t d = nodes_[xs[0]].val.size();
        std::vector<double> v(d, 0.0);
        for (int x : xs) {
            for (std::size_t k = 0; k < d; ++k) v[k] += nodes_[x].val[k];
        }
        const double inv = 1.0 / static_cast<double>(xs.size());
        for (double& e : v) e *= inv;
        return add(std::move(v), [this, xs, inv, d](int self) {
            for (int x : xs) {
                for (std::size_t k = 0; k < d; ++k) {
                    nodes_[x].grad[k] += inv * nodes_[self].grad[k];
                }
            }
        });
    }

    // Slice with clamping; gradient is zero where the clamp is active.
    int clamp_slice(int x, std::size_t off, std::size_t len, double lo, double hi) {
        std::vector<double> v(len);
        for (std::size_t k = 0; k < len; ++k) {
            double e = nodes_[x].val[off + k];
            v[k] = e < lo ? lo : (e > hi ? hi : e);
        }
        return add(std::move(v), [this, x, off, len, lo, hi](int self) {
            for (std::size_t k = 0; k < len; ++k) {
                double e = nodes_[x].val[off + k];
                if (e > lo && e < hi) nodes_[x].grad[off + k] += nodes_[self].grad[k];
            }
        });
    }

    // z = mu + exp(log_sigma) * eps; no gradient to eps.
    int reparam(int mu, int log_sigma, std::vector<double> eps) {
        const std::size_t d = nodes_[mu].val.size();
        std::vector<double> z(d);
        for (std::size_t k = 0; k < d; ++k) {
            z[k] = nodes_[mu].val[k] + std::exp(nodes_[log_sigma].val[k]) * eps[k];
        }
        return add(std::move(z), [this, mu, log_sigma, eps, d](int self) {
            for (std::size_t k = 0; k < d; ++k) {
                double g = nodes_[self].grad[k];
                nodes_[mu].grad[k] += g;
                nodes_[log_sigma].grad[k] +=
                    g * std::exp(nodes_[log_sigma].val[k]) * eps[k];
            }
        });
    }

    // KL(q || p) between diagonal Gaussians given (mu, log sigma) nodes.
    int kl_diag(int q_mu, int q_ls, int p_mu, int p_ls) {
        const std::size_t d = nodes_[q_mu].val.size();
        double kl = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double lq = nodes_[q_ls].val[k], lp = nodes_[p_ls].val[k];
            const double diff = nodes_[q_mu].val[k] - nodes_[p_mu].val[k];
            kl += lp - lq +
                  (std::exp(2.0 * lq) + diff * diff) / (2.0 * std::exp(2.0 * lp)) - 0.5;
        }
        return add({kl}, [this, q_mu, q_ls, p_mu, p_ls, d](int self) {
            const double g = nodes_[self].grad[0];
            for (std::size_t k = 0; k < d; ++k) {
                const double a = std::exp(2.0 * nodes_[q_ls].val[k]);
                const double bb = std::exp(2.0 * nodes_[p_ls].val[k]);
                const double diff = nodes_[q_mu].val[k] - nodes_[p_mu].val[k];
                nodes_[q_mu].grad[k] += g * diff / bb;
                nodes_[p_mu].grad[k] -= g * diff / bb;
                nodes_[q_ls].grad[k] += g * (a / bb - 1.0);
                nodes_[p_ls].grad[k] += g * (1.0 - (a + diff * diff) / bb);
            }
        });
    }

    int kl_standard(int q_mu, int q_ls) {
        const std::size_t d = nodes_[q_mu].val.size();
        int zero = leaf(std::vector<double>(d, 0.0));
        return kl_diag(q_mu, q_ls, zero, zero);
    }

    // Sum over observed dims of log N(x | mu, exp(log_sigma)^2).
    int masked_gauss_loglik(std::vector<double> x, BoolVec mask, int mu,
                            int ls) {
        const std::size_t d = x.size();
        double ll = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            if (!mask[k]) continue;
            const double l = nodes_[ls].val[k];
            const double r = x[k] - nodes_[mu].val[k];
            ll += -kHalfLog2Pi - l - r * r / (2.0 * std::exp(2.0 * l));
        }
        return add({ll}, [this, x, mask, mu, ls, d](int self) {
            const double g = nodes_[self].grad[0];
            for (std::size_t k = 0; k < d; ++k) {
                if (!mask[k]) continue;
                const double var = std::exp(2.0 * nodes_[ls].val[k]);
                const double r = x[k] - nodes_[mu].val[k];
                nodes_[mu].grad[k] += g * r / var;
                nodes_[ls].grad[k] += g * (r * r / var - 1.0);
            }
        });
    }

    // Sum over observed dims of (x - xhat)^2.
    int masked_sse(std::vector<double> x, BoolVec mask, int xhat) {
        double sse = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (mask[k]) {
                const double r = x[k] - nodes_[xhat].val[k];
                sse += r * r;
            }
        }
        return add({sse}, [this, x, mask, xhat](int self) {
            const double g = nodes_[self].grad[0];
            for (std::size_t k = 0; k < x.size(); ++k) {
                if (mask[k]) {
                    nodes_[xhat].grad[k] += g * 2.0 * (nodes_[xhat].val[k] - x[k]);
                }
            }
        });
    }

    // Fused softmax + cross-entropy; optionally exposes the probabilities.
    int softmax_ce(int logits, int label, std::vector<double>* probs_out = nullptr) {
        std::vector<double> p = softmax(nodes_[logits].val);
        if (probs_out) *probs_out = p;
        const double ce = cross_entropy(p, label);
        return add({ce}, [this, logits, label, p](int self) {
            const double g = nodes_[self].grad[0];
            for (std::size_t k = 0; k < p.size(); ++k) {
                nodes_[logits].grad[k] +=
                    g * (p[k] - (static_cast<int>(k) == label ? 1.0 : 0.0));
            }
        });
    }

    // Weighted sum of scalar nodes.
    int combine(std::vector<std::pair<int, double>> terms) {
        double s = 0.0;
        for (auto& [id, w] : terms) s += w * nodes_[id].val[0];
        return add({s}, [this, terms](int self) {
            const double g = nodes_[self].grad[0];
            for (auto& [id, w] : terms) nodes_[id].grad[0] += g * w;
        });
    }

    void backward(int loss) {
        if (nodes_[loss].val.size() != 1) {
            throw NumericError("tape backward: loss node must be scalar");
        }
        nodes_[loss].grad[0] = 1.0;
        for (int i = loss; i >= 0; --i) {
            if (nodes_[i].back) nodes_[i].back(i);
        }
    }

private:
    struct Node {
        std::vector<double> val;
        std::vector<double> grad;
        std::function<void(int)> back;
    };

    int add(std::vector<double> v, std::function<void(int)> back) {
        Node n;
        n.grad.assign(v.size(), 0.0);
        n.val = std::move(v);
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    std::vector<Node> nodes_;
};

}  // namespace labdx
