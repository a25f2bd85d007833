#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "labdx/errors.hpp"

namespace labdx {

using BoolVec = std::vector<std::uint8_t>;

// Dense row-major value container used for parameter blocks and gradients.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, double fill = 0.0)
        : shape(std::move(s)),
          data(std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                               std::multiplies<>()),
               fill) {}

    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
        return Tensor({rows, cols}, fill);
    }
    static Tensor vector(std::size_t n, double fill = 0.0) { return Tensor({n}, fill); }

    std::size_t size() const { return data.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    void check_finite(const std::string& name) const {
        for (double v : data) {
            if (!std::isfinite(v)) {
                throw NumericError("non-finite value in tensor '" + name + "'");
            }
        }
    }
};

}  // namespace labdx
