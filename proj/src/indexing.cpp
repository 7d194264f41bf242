#include "softprog/indexing.hpp"

#include "softprog/errors.hpp"

namespace softprog {

namespace {

Tensor arange(int64_t n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) v[static_cast<size_t>(i)] = static_cast<double>(i);
    return Tensor::vector(std::move(v));
}

// Outer product of per-axis vectors, flattened row-major.
Tensor outer_flat(const std::vector<Tensor>& axis_vectors) {
    Tensor acc = axis_vectors.front();
    for (size_t k = 1; k < axis_vectors.size(); ++k) {
        const Tensor& next = axis_vectors[k];
        acc = matmul(acc.reshaped({acc.size(), 1}), next.reshaped({1, next.size()}))
                  .reshaped({acc.size() * next.size()});
    }
    return acc;
}

std::vector<Tensor> kernel_per_axis(const Tensor& a, const std::vector<Tensor>& coords,
                                    double beta) {
    if (a.size() == 0) throw structural_error("read_real: empty tensor");
    const Shape shape = a.rank() == 0 ? Shape{1} : a.shape();
    if (coords.size() != shape.size())
        throw structural_error("read_real: coordinate count must equal tensor rank");
    std::vector<Tensor> kernels;
    kernels.reserve(coords.size());
    for (size_t k = 0; k < coords.size(); ++k) {
        if (coords[k].size() != 1)
            throw structural_error("read_real: coordinates must be scalars");
        kernels.push_back(logistic_kernel(arange(shape[k]) - coords[k], beta));
    }
    return kernels;
}

} // namespace

Tensor logistic_kernel(const Tensor& offsets, double beta) {
    if (beta <= 0.0) throw parameter_error("logistic_kernel: beta must be positive");
    return (beta / 4.0) * sech2_half(offsets, beta);
}

Tensor read_real_weights(const Tensor& a, const std::vector<Tensor>& coords, double beta) {
    Tensor w = outer_flat(kernel_per_axis(a, coords, beta));
    return w / detach(reduce_sum(w));
}

Tensor read_real(const Tensor& a, const std::vector<Tensor>& coords, double beta) {
    Tensor w = outer_flat(kernel_per_axis(a, coords, beta));
    Tensor total = reduce_sum(w);
    if (total.item() == 0.0)
        throw numeric_domain_error("read_real: kernel mass underflowed to zero");
    return reduce_sum(w * a.reshaped({a.size()})) / detach(total);
}

Tensor read_categorical(const Tensor& a, const std::vector<CategoricalDistribution>& weights) {
    if (a.size() == 0) throw structural_error("read_categorical: empty tensor");
    const Shape shape = a.rank() == 0 ? Shape{1} : a.shape();
    if (weights.size() != shape.size())
        throw structural_error("read_categorical: one weight vector per axis required");
    std::vector<Tensor> per_axis;
    per_axis.reserve(weights.size());
    for (size_t k = 0; k < weights.size(); ++k) {
        if (weights[k].categories() != shape[k])
            throw structural_error("read_categorical: weight length does not match axis extent");
        per_axis.push_back(weights[k].weights);
    }
    Tensor m = outer_flat(per_axis);
    return reduce_sum(m * a.reshaped({a.size()}));
}

Tensor write_categorical(const Tensor& a, const std::vector<CategoricalDistribution>& weights,
                         const Tensor& v) {
    if (a.size() == 0) throw structural_error("write_categorical: empty tensor");
    if (v.size() != 1) throw structural_error("write_categorical: value must be a scalar");
    const Shape shape = a.rank() == 0 ? Shape{1} : a.shape();
    if (weights.size() != shape.size())
        throw structural_error("write_categorical: one weight vector per axis required");
    std::vector<Tensor> per_axis;
    per_axis.reserve(weights.size());
    for (size_t k = 0; k < weights.size(); ++k) {
        if (weights[k].categories() != shape[k])
            throw structural_error("write_categorical: weight length does not match axis extent");
        per_axis.push_back(weights[k].weights);
    }
    Tensor m = outer_flat(per_axis);
    Tensor blended = a.reshaped({a.size()}) * (1.0 - m) + m * v;
    return blended.reshaped(a.shape());
}

} // namespace softprog
