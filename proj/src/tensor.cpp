#include "softprog/tensor.hpp"

#include <atomic>

#include "softprog/errors.hpp"

namespace softprog {

namespace {
std::atomic<bool> g_debug_checks{false};
}

void set_debug_checks(bool enabled) { g_debug_checks.store(enabled); }
bool debug_checks_enabled() { return g_debug_checks.load(std::memory_order_relaxed); }

int64_t shape_numel(const Shape& shape) {
    int64_t n = 1;
    for (int64_t e : shape) {
        if (e < 0) throw structural_error("negative shape extent");
        n *= e;
    }
    return n;
}

Tensor::Tensor(double v)
    : shape_{}, data_(std::make_shared<std::vector<double>>(1, v)) {}

Tensor Tensor::from(Shape shape, std::vector<double> data) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
        throw structural_error("tensor data length does not match shape");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<double>>(std::move(data));
    return t;
}

Tensor Tensor::vector(std::vector<double> data) {
    Shape shape{static_cast<int64_t>(data.size())};
    return from(std::move(shape), std::move(data));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double v) {
    const int64_t n = shape_numel(shape);
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<double>>(static_cast<size_t>(n), v);
    return t;
}

Tensor Tensor::reshaped(Shape new_shape) const {
    if (shape_numel(new_shape) != size())
        throw structural_error("reshaped: element count mismatch");
    Tensor t = *this;
    t.shape_ = std::move(new_shape);
    return t;
}

double Tensor::item() const {
    if (size() != 1) throw structural_error("item() requires a single-element tensor");
    return (*data_)[0];
}

double Tensor::at(int64_t row, int64_t col) const {
    if (rank() != 2) throw structural_error("at(row, col) requires a rank-2 tensor");
    return (*data_)[static_cast<size_t>(row * shape_[1] + col)];
}

} // namespace softprog
