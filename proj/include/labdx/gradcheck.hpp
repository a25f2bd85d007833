#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "labdx/errors.hpp"

namespace labdx {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  // coordinates excluded as non-smooth
    std::size_t worst_coord = 0;
    bool pass = false;
};

// Central finite differences against an analytic gradient. At most
// `max_coords` coordinates are sampled; coordinates where a curvature probe
// indicates a kink (e.g. a ReLU boundary) are excluded.
inline GradCheckReport grad_check(
    const std::function<double(const std::vector<double>&)>& f,
    const std::function<std::vector<double>(const std::vector<double>&)>& analytic_grad,
    const std::vector<double>& params, double tolerance, std::size_t max_coords = 1000,
    double h = 1e-5, unsigned long sample_seed = 0) {
    const double f0 = f(params);
    if (!std::isfinite(f0)) throw NumericError("grad_check: non-finite loss");
    const std::vector<double> grad = analytic_grad(params);
    if (grad.size() != params.size()) {
        throw NumericError("grad_check: gradient size mismatch");
    }

    std::vector<std::size_t> coords(params.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > max_coords) {
        std::mt19937_64 rng(sample_seed);
        std::shuffle(coords.begin(), coords.end(), rng);
        coords.resize(max_coords);
    }

    GradCheckReport rep;
    std::vector<double> x = params;
    for (std::size_t i : coords) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NumericError("grad_check: non-finite loss during probing");
        }
        const double fd = (fp - fm) / (2.0 * h);
        // Curvature probe: |f(x+h)+f(x-h)-2f(x)| is O(h^2) when smooth but
        // O(h) across a slope discontinuity.
        const double curv = std::abs(fp + fm - 2.0 * f0) / h;
        if (curv > 0.01 * std::max(1.0, std::abs(fd))) {
            ++rep.skipped;
            continue;
        }
        const double rel =
            std::abs(grad[i] - fd) / std::max({1.0, std::abs(grad[i]), std::abs(fd)});
        if (rel > rep.max_rel_err) {
            rep.max_rel_err = rel;
            rep.worst_coord = i;
        }
        ++rep.checked;
    }
    rep.pass = rep.max_rel_err <= tolerance;
    return rep;
}

}  // namespace labdx
