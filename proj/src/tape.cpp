#include "softprog/tape.hpp"

#include <cmath>

#include "softprog/errors.hpp"

namespace softprog {

bool gradient_fault_active(const char* op_name); // ops.cpp

Tensor Tape::leaf(const Tensor& value) {
    TapeNode node;
    node.op = Op::leaf;
    node.size = value.size();
    node.vr = value.buffer();
    int32_t id = record(std::move(node));
    return attach(value.shape(), value.buffer(), id);
}

int32_t Tape::record(TapeNode node) {
    nodes_.push_back(std::move(node));
    return static_cast<int32_t>(nodes_.size() - 1);
}

namespace {

inline std::vector<double>& ensure(std::vector<std::vector<double>>& grads, int32_t id,
                                   int64_t size) {
    auto& g = grads[static_cast<size_t>(id)];
    if (g.empty()) g.assign(static_cast<size_t>(size), 0.0);
    return g;
}

// Accumulates into a binary op's operand, reducing over the output when the
// operand is a broadcast scalar.
template <typename Contrib>
void accumulate_binary(std::vector<std::vector<double>>& grads, int32_t parent, int64_t parent_size,
                       const std::vector<double>& g, Contrib contrib) {
    if (parent < 0) return;
    auto& pg = ensure(grads, parent, parent_size);
    if (parent_size == static_cast<int64_t>(g.size())) {
        for (size_t t = 0; t < g.size(); ++t) pg[t] += contrib(t);
    } else {
        double s = 0;
        for (size_t t = 0; t < g.size(); ++t) s += contrib(t);
        pg[0] += s;
    }
}

inline double side(const std::vector<double>& v, size_t t) {
    return v.size() == 1 ? v[0] : v[t];
}

} // namespace

GradientMap Tape::backward(const Tensor& loss) const {
    if (!loss.tracked() || loss.tape() != this)
        throw structural_error("backward: loss is not tracked on this tape");
    if (loss.size() != 1) throw structural_error("backward: loss must be a scalar");

    GradientMap gm;
    gm.tape_ = this;
    gm.grads_.resize(nodes_.size());
    gm.grads_[static_cast<size_t>(loss.node())] = {1.0};

    auto& grads = gm.grads_;
    for (int32_t i = loss.node(); i >= 0; --i) {
        const std::vector<double>& g = grads[static_cast<size_t>(i)];
        if (g.empty()) continue;
        const TapeNode& n = nodes_[static_cast<size_t>(i)];
        switch (n.op) {
            case Op::leaf:
                break;
            case Op::add: {
                accumulate_binary(grads, n.a, static_cast<int64_t>(n.va->size()), g,
                                  [&](size_t t) { return g[t]; });
                accumulate_binary(grads, n.b, static_cast<int64_t>(n.vb->size()), g,
                                  [&](size_t t) { return g[t]; });
                break;
            }
            case Op::sub: {
                accumulate_binary(grads, n.a, static_cast<int64_t>(n.va->size()), g,
                                  [&](size_t t) { return g[t]; });
                accumulate_binary(grads, n.b, static_cast<int64_t>(n.vb->size()), g,
                                  [&](size_t t) { return -g[t]; });
                break;
            }
            case Op::mul: {
                accumulate_binary(grads, n.a, static_cast<int64_t>(n.va->size()), g,
                                  [&](size_t t) { return g[t] * side(*n.vb, t); });
                accumulate_binary(grads, n.b, static_cast<int64_t>(n.vb->size()), g,
                                  [&](size_t t) { return g[t] * side(*n.va, t); });
                break;
            }
            case Op::div: {
                accumulate_binary(grads, n.a, static_cast<int64_t>(n.va->size()), g,
                                  [&](size_t t) { return g[t] / side(*n.vb, t); });
                accumulate_binary(grads, n.b, static_cast<int64_t>(n.vb->size()), g, [&](size_t t) {
                    const double b = side(*n.vb, t);
                    return -g[t] * side(*n.va, t) / (b * b);
                });
                break;
            }
            case Op::neg: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.size);
                for (size_t t = 0; t < g.size(); ++t) pg[t] -= g[t];
                break;
            }
            case Op::exp: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.size);
                for (size_t t = 0; t < g.size(); ++t) pg[t] += g[t] * (*n.vr)[t];
                break;
            }
            case Op::log: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.size);
                for (size_t t = 0; t < g.size(); ++t) pg[t] += g[t] / (*n.va)[t];
                break;
            }
            case Op::sqrt: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.size);
                for (size_t t = 0; t < g.size(); ++t) pg[t] += g[t] * 0.5 / (*n.vr)[t];
                break;
            }
            case Op::abs_smooth: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.size);
                for (size_t t = 0; t < g.size(); ++t) pg[t] += g[t] * (*n.va)[t] / (*n.vr)[t];
                break;
            }
            case Op::pow_scalar: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.size);
                for (size_t t = 0; t < g.size(); ++t)
                    pg[t] += g[t] * n.aux * std::pow((*n.va)[t], n.aux - 1.0);
                break;
            }
            case Op::sigmoid: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.size);
                const double fault = gradient_fault_active("stable_sigmoid") ? 1.01 : 1.0;
                for (size_t t = 0; t < g.size(); ++t) {
                    const double s = (*n.vr)[t];
                    pg[t] += fault * g[t] * n.aux * s * (1.0 - s);
                }
                break;
            }
            case Op::sum_all: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.rows);
                for (auto& v : pg) v += g[0];
                break;
            }
            case Op::mean_all: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.rows);
                const double s = g[0] / static_cast<double>(n.rows);
                for (auto& v : pg) v += s;
                break;
            }
            case Op::prod_all: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.rows);
                const auto& x = *n.va;
                // Exclusion products via prefix/suffix scans; exact for zeros.
                std::vector<double> suffix(x.size() + 1, 1.0);
                for (size_t t = x.size(); t > 0; --t) suffix[t - 1] = suffix[t] * x[t - 1];
                double prefix = 1.0;
                for (size_t t = 0; t < x.size(); ++t) {
                    pg[t] += g[0] * prefix * suffix[t + 1];
                    prefix *= x[t];
                }
                break;
            }
            case Op::sum_axis0: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, static_cast<int64_t>(n.rows) * n.cols);
                for (int32_t r = 0; r < n.rows; ++r)
                    for (int32_t c = 0; c < n.cols; ++c)
                        pg[static_cast<size_t>(r) * n.cols + c] += g[static_cast<size_t>(c)];
                break;
            }
            case Op::sum_axis1: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, static_cast<int64_t>(n.rows) * n.cols);
                for (int32_t r = 0; r < n.rows; ++r)
                    for (int32_t c = 0; c < n.cols; ++c)
                        pg[static_cast<size_t>(r) * n.cols + c] += g[static_cast<size_t>(r)];
                break;
            }
            case Op::repeat_rows: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.cols);
                for (int32_t r = 0; r < n.rows; ++r)
                    for (int32_t c = 0; c < n.cols; ++c)
                        pg[static_cast<size_t>(c)] += g[static_cast<size_t>(r) * n.cols + c];
                break;
            }
            case Op::repeat_cols: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.rows);
                for (int32_t r = 0; r < n.rows; ++r)
                    for (int32_t c = 0; c < n.cols; ++c)
                        pg[static_cast<size_t>(r)] += g[static_cast<size_t>(r) * n.cols + c];
                break;
            }
            case Op::matmul: {
                const int64_t m = n.rows, k = n.inner, c = n.cols;
                if (n.a >= 0) {
                    auto& pg = ensure(grads, n.a, m * k);
                    const auto& b = *n.vb;
                    for (int64_t i = 0; i < m; ++i)
                        for (int64_t p = 0; p < k; ++p) {
                            double s = 0;
                            for (int64_t j = 0; j < c; ++j)
                                s += g[static_cast<size_t>(i * c + j)] *
                                     b[static_cast<size_t>(p * c + j)];
                            pg[static_cast<size_t>(i * k + p)] += s;
                        }
                }
                if (n.b >= 0) {
                    auto& pg = ensure(grads, n.b, k * c);
                    const auto& a = *n.va;
                    for (int64_t p = 0; p < k; ++p)
                        for (int64_t j = 0; j < c; ++j) {
                            double s = 0;
                            for (int64_t i = 0; i < m; ++i)
                                s += a[static_cast<size_t>(i * k + p)] *
                                     g[static_cast<size_t>(i * c + j)];
                            pg[static_cast<size_t>(p * c + j)] += s;
                        }
                }
                break;
            }
            case Op::gather: {
                if (n.a < 0) break;
                auto& pg = ensure(grads, n.a, n.rows);
                const auto& idx = *n.idx;
                for (size_t t = 0; t < idx.size(); ++t)
                    pg[static_cast<size_t>(idx[t])] += g[t];
                break;
            }
            case Op::scatter: {
                const auto& idx = *n.idx;
                if (n.a >= 0) {
                    auto& pg = ensure(grads, n.a, n.size);
                    for (size_t t = 0; t < g.size(); ++t) pg[t] += g[t];
                    for (int64_t p : idx) pg[static_cast<size_t>(p)] -= g[static_cast<size_t>(p)];
                }
                if (n.b >= 0) {
                    auto& pg = ensure(grads, n.b, n.rows);
                    for (size_t t = 0; t < idx.size(); ++t)
                        pg[n.rows == 1 ? 0 : t] += g[static_cast<size_t>(idx[t])];
                }
                break;
            }
            case Op::stack: {
                for (size_t t = 0; t < n.parents.size(); ++t) {
                    if (n.parents[t] < 0) continue;
                    auto& pg = ensure(grads, n.parents[t], 1);
                    pg[0] += g[t];
                }
                break;
            }
        }
    }
    return gm;
}

Tensor GradientMap::grad(const Tensor& t) const {
    if (!t.tracked() || t.tape() != tape_)
        throw structural_error("grad: tensor is not tracked on this tape");
    const auto& g = grads_[static_cast<size_t>(t.node())];
    if (g.empty()) return Tensor::zeros(t.shape());
    return Tensor::from(t.shape(), g);
}

} // namespace softprog
