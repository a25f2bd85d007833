#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "labdx/errors.hpp"
#include "labdx/tensor.hpp"

namespace labdx {

inline constexpr double kLogSigmaMin = -7.0;
inline constexpr double kLogSigmaMax = 7.0;
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*ln(2*pi)

struct DiagGaussian {
    std::vector<double> mu;
    std::vector<double> sigma;  // standard deviations, > 0

    std::size_t dim() const { return mu.size(); }

    static DiagGaussian standard(std::size_t d) {
        return DiagGaussian{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    }
};

struct LatentSample {
    std::vector<double> z;
    std::vector<double> noise;  // the standard normal draws; z = mu + sigma*noise
};

// KL(q || p) for diagonal Gaussians, closed form, always >= 0.
inline double kl_diag(const DiagGaussian& q, const DiagGaussian& p) {
    if (q.dim() != p.dim() || q.sigma.size() != q.dim() || p.sigma.size() != p.dim()) {
        throw NumericError("kl_diag: dimension mismatch");
    }
    double kl = 0.0;
    for (std::size_t d = 0; d < q.dim(); ++d) {
        const double sq = q.sigma[d], sp = p.sigma[d];
        const double diff = q.mu[d] - p.mu[d];
        kl += std::log(sp / sq) + (sq * sq + diff * diff) / (2.0 * sp * sp) - 0.5;
    }
    return kl;
}

inline LatentSample reparameterize(const DiagGaussian& g, std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    LatentSample s;
    s.noise.resize(g.dim());
    s.z.resize(g.dim());
    for (std::size_t d = 0; d < g.dim(); ++d) {
        s.noise[d] = n01(rng);
        s.z[d] = g.mu[d] + g.sigma[d] * s.noise[d];
    }
    return s;
}

// Log-likelihood over observed dimensions only; masked dimensions contribute
// exactly zero to value and gradient.
inline double masked_gaussian_loglik(const std::vector<double>& x,
                                     const BoolVec& mask,
                                     const DiagGaussian& g) {
    if (x.size() != g.dim() || mask.size() != g.dim()) {
        throw NumericError("masked_gaussian_loglik: dimension mismatch");
    }
    double ll = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (!mask[d]) continue;
        const double s = g.sigma[d];
        const double r = x[d] - g.mu[d];
        ll += -kHalfLog2Pi - std::log(s) - r * r / (2.0 * s * s);
    }
    return ll;
}

inline double cross_entropy(const std::vector<double>& probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size()) {
        throw NumericError("cross_entropy: label " + std::to_string(label) +
                           " out of range [0," + std::to_string(probs.size()) + ")");
    }
    return -std::log(std::max(probs[static_cast<std::size_t>(label)], kProbFloor));
}

inline double clamp_log_sigma(double ls) {
    return ls < kLogSigmaMin ? kLogSigmaMin : (ls > kLogSigmaMax ? kLogSigmaMax : ls);
}

}  // namespace labdx
