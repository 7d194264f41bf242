#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "softprog/ops.hpp"
#include "softprog/tape.hpp"
#include "softprog/tensor.hpp"

namespace testutil {

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline softprog::Tensor random_tensor(std::mt19937_64& gen, softprog::Shape shape, double lo = -2.0,
                                      double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> data(static_cast<size_t>(softprog::shape_numel(shape)));
    for (auto& v : data) v = dist(gen);
    return softprog::Tensor::from(std::move(shape), std::move(data));
}

// Relative error with a floor so near-zero gradients are compared absolutely.
inline double rel_err(double a, double b, double floor_ = 1e-4) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor_});
}

inline double max_rel_err(const softprog::Tensor& a, const softprog::Tensor& b,
                          double floor_ = 1e-4) {
    double worst = 0;
    for (int64_t t = 0; t < a.size(); ++t) worst = std::max(worst, rel_err(a[t], b[t], floor_));
    return worst;
}

// Analytic reverse-mode gradient vs. central finite differences for a scalar
// function of one tensor.
inline double gradcheck_max_err(const std::function<softprog::Tensor(const softprog::Tensor&)>& f,
                                const softprog::Tensor& x, double h = 1e-5) {
    softprog::Tape tape;
    softprog::Tensor xt = tape.leaf(x);
    softprog::Tensor loss = f(xt);
    auto gm = tape.backward(loss);
    softprog::Tensor analytic = gm.grad(xt);
    softprog::Tensor numeric = softprog::finite_difference_grad(
        [&](const softprog::Tensor& v) { return f(v).item(); }, x, h);
    return max_rel_err(analytic, numeric);
}

} // namespace testutil
