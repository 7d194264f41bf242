#include "softprog/ops.hpp"

#include <cmath>
#include <string>

#include "softprog/errors.hpp"

namespace softprog {

namespace {

std::string g_fault_op;

Tape* common_tape(const Tensor& a, const Tensor& b) {
    if (a.tracked() && b.tracked() && a.tape() != b.tape())
        throw structural_error("operands belong to different tapes");
    return a.tracked() ? a.tape() : (b.tracked() ? b.tape() : nullptr);
}

std::shared_ptr<const std::vector<double>> share(const Tensor& t) { return t.buffer(); }

void check_result(const std::vector<double>& v, const char* op_name) {
    if (!debug_checks_enabled()) return;
    for (double x : v) {
        if (!std::isfinite(x))
            throw numeric_domain_error(std::string("non-finite value produced by ") + op_name);
    }
}

Tensor finish(Tape* tape, Shape shape, std::vector<double> data, TapeNode node,
              const char* op_name) {
    check_result(data, op_name);
    if (!tape) return Tensor::from(std::move(shape), std::move(data));
    auto buf = std::make_shared<const std::vector<double>>(std::move(data));
    node.size = static_cast<int64_t>(buf->size());
    node.vr = buf;
    int32_t id = tape->record(std::move(node));
    return tape->attach(std::move(shape), buf, id);
}

enum class BinOp { add, sub, mul, div };

Tensor binary(BinOp kind, const Tensor& a, const Tensor& b, Op op, const char* name) {
    const bool a_scalar = a.size() == 1;
    const bool b_scalar = b.size() == 1;
    if (!a_scalar && !b_scalar && !a.same_shape(b))
        throw structural_error(std::string(name) + ": shape mismatch");
    const Tensor& shaped = a_scalar && !b_scalar ? b : a;
    const int64_t n = shaped.size();
    std::vector<double> out(static_cast<size_t>(n));
    const auto& av = a.data();
    const auto& bv = b.data();
    if (kind == BinOp::div) {
        for (double d : bv)
            if (d == 0.0) throw numeric_domain_error("div: zero denominator");
    }
    for (int64_t t = 0; t < n; ++t) {
        const double x = av[a_scalar ? 0 : static_cast<size_t>(t)];
        const double y = bv[b_scalar ? 0 : static_cast<size_t>(t)];
        double r = 0;
        switch (kind) {
            case BinOp::add: r = x + y; break;
            case BinOp::sub: r = x - y; break;
            case BinOp::mul: r = x * y; break;
            case BinOp::div: r = x / y; break;
        }
        out[static_cast<size_t>(t)] = r;
    }
    Tape* tape = common_tape(a, b);
    TapeNode node;
    node.op = op;
    node.a = a.tracked() ? a.node() : -1;
    node.b = b.tracked() ? b.node() : -1;
    if (tape) {
        node.va = share(a);
        node.vb = share(b);
    }
    return finish(tape, shaped.shape(), std::move(out), std::move(node), name);
}

Tensor unary(const Tensor& a, Op op, const char* name, double aux,
             const std::function<double(double)>& f) {
    std::vector<double> out(static_cast<size_t>(a.size()));
    const auto& av = a.data();
    for (size_t t = 0; t < av.size(); ++t) out[t] = f(av[t]);
    TapeNode node;
    node.op = op;
    node.a = a.tracked() ? a.node() : -1;
    node.aux = aux;
    if (a.tracked()) node.va = share(a);
    return finish(a.tape(), a.shape(), std::move(out), std::move(node), name);
}

double sigmoid_value(double x, double beta) {
    const double z = beta * x;
    // Positive-branch evaluation plus exact complement, so that
    // sigmoid(x) + sigmoid(-x) == 1 holds bitwise.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    return 1.0 - 1.0 / (1.0 + std::exp(z));
}

} // namespace

void set_gradient_fault(const std::string& op_name) { g_fault_op = op_name; }
void clear_gradient_fault() { g_fault_op.clear(); }
bool gradient_fault_active(const char* op_name); // defined below, used by tape.cpp

bool gradient_fault_active(const char* op_name) { return g_fault_op == op_name; }

Tensor add(const Tensor& a, const Tensor& b) { return binary(BinOp::add, a, b, Op::add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(BinOp::sub, a, b, Op::sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(BinOp::mul, a, b, Op::mul, "mul"); }
Tensor div(const Tensor& a, const Tensor& b) { return binary(BinOp::div, a, b, Op::div, "div"); }

Tensor neg(const Tensor& a) {
    return unary(a, Op::neg, "neg", 0.0, [](double x) { return -x; });
}

Tensor exp(const Tensor& a) {
    return unary(a, Op::exp, "exp", 0.0, [](double x) { return std::exp(x); });
}

Tensor log(const Tensor& a) {
    for (double x : a.data())
        if (x <= 0.0) throw numeric_domain_error("log: argument must be positive");
    return unary(a, Op::log, "log", 0.0, [](double x) { return std::log(x); });
}

Tensor sqrt(const Tensor& a) {
    for (double x : a.data())
        if (x < 0.0) throw numeric_domain_error("sqrt: negative argument");
    return unary(a, Op::sqrt, "sqrt", 0.0, [](double x) { return std::sqrt(x); });
}

Tensor abs_smooth(const Tensor& a) {
    return unary(a, Op::abs_smooth, "abs_smooth", 0.0,
                 [](double x) { return std::sqrt(x * x + 1e-24); });
}

Tensor pow_scalar(const Tensor& a, double exponent) {
    return unary(a, Op::pow_scalar, "pow_scalar", exponent,
                 [exponent](double x) { return std::pow(x, exponent); });
}

Tensor stable_sigmoid(const Tensor& x, double beta) {
    if (beta <= 0.0) throw parameter_error("stable_sigmoid: beta must be positive");
    return unary(x, Op::sigmoid, "stable_sigmoid", beta,
                 [beta](double v) { return sigmoid_value(v, beta); });
}

Tensor sech2_half(const Tensor& x, double beta) {
    if (beta <= 0.0) throw parameter_error("sech2_half: beta must be positive");
    Tensor s = stable_sigmoid(x, beta);
    return 4.0 * s * (1.0 - s);
}

Tensor softmax(const Tensor& x, double beta, int axis) {
    if (beta <= 0.0) throw parameter_error("softmax: beta must be positive");
    if (x.size() == 0) throw structural_error("softmax: empty tensor");
    if (x.rank() <= 1) {
        const double m = hard_max(x);
        Tensor e = exp((x - m) * beta);
        return e / reduce_sum(e);
    }
    if (x.rank() != 2 || (axis != 0 && axis != 1))
        throw structural_error("softmax: unsupported rank/axis");
    const int64_t r = x.shape()[0], c = x.shape()[1];
    if (axis == 0) {
        std::vector<double> m(static_cast<size_t>(c), -1e300);
        for (int64_t i = 0; i < r; ++i)
            for (int64_t j = 0; j < c; ++j)
                m[static_cast<size_t>(j)] = std::max(m[static_cast<size_t>(j)], x.at(i, j));
        Tensor shift = repeat_rows(Tensor::vector(std::move(m)), r);
        Tensor e = exp((x - shift) * beta);
        return e / repeat_rows(sum_axis(e, 0), r);
    }
    std::vector<double> m(static_cast<size_t>(r), -1e300);
    for (int64_t i = 0; i < r; ++i)
        for (int64_t j = 0; j < c; ++j)
            m[static_cast<size_t>(i)] = std::max(m[static_cast<size_t>(i)], x.at(i, j));
    Tensor shift = repeat_cols(Tensor::vector(std::move(m)), c);
    Tensor e = exp((x - shift) * beta);
    return e / repeat_cols(sum_axis(e, 1), c);
}

Tensor reduce_sum(const Tensor& x) {
    double s = 0;
    for (double v : x.data()) s += v;
    TapeNode node;
    node.op = Op::sum_all;
    node.a = x.tracked() ? x.node() : -1;
    node.rows = static_cast<int32_t>(x.size());
    return finish(x.tape(), Shape{}, {s}, std::move(node), "reduce_sum");
}

Tensor reduce_mean(const Tensor& x) {
    if (x.size() == 0) throw structural_error("reduce_mean: empty tensor");
    double s = 0;
    for (double v : x.data()) s += v;
    TapeNode node;
    node.op = Op::mean_all;
    node.a = x.tracked() ? x.node() : -1;
    node.rows = static_cast<int32_t>(x.size());
    return finish(x.tape(), Shape{}, {s / static_cast<double>(x.size())}, std::move(node),
                  "reduce_mean");
}

Tensor reduce_prod(const Tensor& x) {
    double p = 1;
    for (double v : x.data()) p *= v;
    TapeNode node;
    node.op = Op::prod_all;
    node.a = x.tracked() ? x.node() : -1;
    node.rows = static_cast<int32_t>(x.size());
    if (x.tracked()) node.va = share(x);
    return finish(x.tape(), Shape{}, {p}, std::move(node), "reduce_prod");
}

Tensor sum_axis(const Tensor& x, int axis) {
    if (x.rank() != 2 || (axis != 0 && axis != 1))
        throw structural_error("sum_axis: rank-2 tensor and axis 0/1 required");
    const int64_t r = x.shape()[0], c = x.shape()[1];
    TapeNode node;
    node.op = axis == 0 ? Op::sum_axis0 : Op::sum_axis1;
    node.a = x.tracked() ? x.node() : -1;
    node.rows = static_cast<int32_t>(r);
    node.cols = static_cast<int32_t>(c);
    std::vector<double> out(static_cast<size_t>(axis == 0 ? c : r), 0.0);
    for (int64_t i = 0; i < r; ++i)
        for (int64_t j = 0; j < c; ++j)
            out[static_cast<size_t>(axis == 0 ? j : i)] += x.at(i, j);
    return finish(x.tape(), Shape{axis == 0 ? c : r}, std::move(out), std::move(node), "sum_axis");
}

Tensor repeat_rows(const Tensor& v, int64_t rows) {
    if (v.rank() > 1) throw structural_error("repeat_rows: rank-1 input required");
    if (rows < 1) throw structural_error("repeat_rows: rows must be >= 1");
    const int64_t c = v.size();
    std::vector<double> out(static_cast<size_t>(rows * c));
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < c; ++j)
            out[static_cast<size_t>(i * c + j)] = v[j];
    TapeNode node;
    node.op = Op::repeat_rows;
    node.a = v.tracked() ? v.node() : -1;
    node.rows = static_cast<int32_t>(rows);
    node.cols = static_cast<int32_t>(c);
    return finish(v.tape(), Shape{rows, c}, std::move(out), std::move(node), "repeat_rows");
}

Tensor repeat_cols(const Tensor& v, int64_t cols) {
    if (v.rank() > 1) throw structural_error("repeat_cols: rank-1 input required");
    if (cols < 1) throw structural_error("repeat_cols: cols must be >= 1");
    const int64_t r = v.size();
    std::vector<double> out(static_cast<size_t>(r * cols));
    for (int64_t i = 0; i < r; ++i)
        for (int64_t j = 0; j < cols; ++j)
            out[static_cast<size_t>(i * cols + j)] = v[i];
    TapeNode node;
    node.op = Op::repeat_cols;
    node.a = v.tracked() ? v.node() : -1;
    node.rows = static_cast<int32_t>(r);
    node.cols = static_cast<int32_t>(cols);
    return finish(v.tape(), Shape{r, cols}, std::move(out), std::move(node), "repeat_cols");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() > 2 || b.rank() > 2) throw structural_error("matmul: rank must be <= 2");
    const int64_t m = a.rank() == 2 ? a.shape()[0] : 1;
    const int64_t k = a.rank() == 2 ? a.shape()[1] : a.size();
    const int64_t k2 = b.rank() == 2 ? b.shape()[0] : b.size();
    const int64_t n = b.rank() == 2 ? b.shape()[1] : 1;
    if (k != k2) throw structural_error("matmul: inner dimensions disagree");
    std::vector<double> out(static_cast<size_t>(m * n), 0.0);
    const auto& av = a.data();
    const auto& bv = b.data();
    for (int64_t i = 0; i < m; ++i)
        for (int64_t p = 0; p < k; ++p) {
            const double x = av[static_cast<size_t>(i * k + p)];
            for (int64_t j = 0; j < n; ++j)
                out[static_cast<size_t>(i * n + j)] += x * bv[static_cast<size_t>(p * n + j)];
        }
    Tape* tape = common_tape(a, b);
    TapeNode node;
    node.op = Op::matmul;
    node.a = a.tracked() ? a.node() : -1;
    node.b = b.tracked() ? b.node() : -1;
    node.rows = static_cast<int32_t>(m);
    node.inner = static_cast<int32_t>(k);
    node.cols = static_cast<int32_t>(n);
    if (tape) {
        node.va = share(a);
        node.vb = share(b);
    }
    Shape out_shape = a.rank() == 2 && b.rank() == 2 ? Shape{m, n}
                      : (b.rank() == 2 ? Shape{n} : Shape{m});
    if (a.rank() == 1 && b.rank() == 1) out_shape = Shape{};
    return finish(tape, std::move(out_shape), std::move(out), std::move(node), "matmul");
}

Tensor detach(const Tensor& x) {
    if (!x.tracked()) return x;
    return Tensor::from(x.shape(), x.data());
}

Tensor gather(const Tensor& x, std::vector<int64_t> idx, Shape out_shape) {
    if (shape_numel(out_shape) != static_cast<int64_t>(idx.size()))
        throw structural_error("gather: output shape does not match index count");
    std::vector<double> out(idx.size());
    for (size_t t = 0; t < idx.size(); ++t) {
        if (idx[t] < 0 || idx[t] >= x.size()) throw structural_error("gather: index out of range");
        out[t] = x[idx[t]];
    }
    TapeNode node;
    node.op = Op::gather;
    node.a = x.tracked() ? x.node() : -1;
    node.rows = static_cast<int32_t>(x.size());
    node.idx = std::make_shared<const std::vector<int64_t>>(std::move(idx));
    return finish(x.tape(), std::move(out_shape), std::move(out), std::move(node), "gather");
}

Tensor scatter_set(const Tensor& x, std::vector<int64_t> pos, const Tensor& values) {
    if (values.size() != static_cast<int64_t>(pos.size()) && values.size() != 1)
        throw structural_error("scatter_set: values size does not match position count");
    std::vector<double> out = x.data();
    for (size_t t = 0; t < pos.size(); ++t) {
        if (pos[t] < 0 || pos[t] >= x.size())
            throw structural_error("scatter_set: position out of range");
        out[static_cast<size_t>(pos[t])] = values[values.size() == 1 ? 0 : static_cast<int64_t>(t)];
    }
    Tape* tape = common_tape(x, values);
    TapeNode node;
    node.op = Op::scatter;
    node.a = x.tracked() ? x.node() : -1;
    node.b = values.tracked() ? values.node() : -1;
    node.rows = static_cast<int32_t>(values.size());
    node.idx = std::make_shared<const std::vector<int64_t>>(std::move(pos));
    return finish(tape, x.shape(), std::move(out), std::move(node), "scatter_set");
}

Tensor element(const Tensor& x, int64_t flat) { return gather(x, {flat}, Shape{}); }

Tensor element2(const Tensor& x, int64_t row, int64_t col) {
    if (x.rank() != 2) throw structural_error("element2: rank-2 tensor required");
    return element(x, row * x.shape()[1] + col);
}

Tensor stack_scalars(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw structural_error("stack_scalars: empty input");
    std::vector<double> out(xs.size());
    Tape* tape = nullptr;
    for (const auto& x : xs) {
        if (x.size() != 1) throw structural_error("stack_scalars: operands must be scalars");
        if (x.tracked()) {
            if (tape && x.tape() != tape)
                throw structural_error("stack_scalars: operands belong to different tapes");
            tape = x.tape();
        }
    }
    TapeNode node;
    node.op = Op::stack;
    node.parents.reserve(xs.size());
    for (size_t t = 0; t < xs.size(); ++t) {
        out[t] = xs[t].item();
        node.parents.push_back(xs[t].tracked() ? xs[t].node() : -1);
    }
    return finish(tape, Shape{static_cast<int64_t>(xs.size())}, std::move(out), std::move(node),
                  "stack_scalars");
}

int64_t hard_argmax(const Tensor& x) {
    if (x.size() == 0) throw structural_error("hard_argmax: empty tensor");
    int64_t best = 0;
    for (int64_t t = 1; t < x.size(); ++t)
        if (x[t] > x[best]) best = t;
    return best;
}

int64_t hard_argmin(const Tensor& x) {
    if (x.size() == 0) throw structural_error("hard_argmin: empty tensor");
    int64_t best = 0;
    for (int64_t t = 1; t < x.size(); ++t)
        if (x[t] < x[best]) best = t;
    return best;
}

double hard_max(const Tensor& x) { return x[hard_argmax(x)]; }
double hard_min(const Tensor& x) { return x[hard_argmin(x)]; }

Tensor finite_difference_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                              double h) {
    if (h <= 0.0) throw parameter_error("finite_difference_grad: step must be positive");
    std::vector<double> g(static_cast<size_t>(x.size()));
    for (int64_t t = 0; t < x.size(); ++t) {
        std::vector<double> lo = x.data(), hi = x.data();
        lo[static_cast<size_t>(t)] -= h;
        hi[static_cast<size_t>(t)] += h;
        const double f_hi = f(Tensor::from(x.shape(), std::move(hi)));
        const double f_lo = f(Tensor::from(x.shape(), std::move(lo)));
        g[static_cast<size_t>(t)] = (f_hi - f_lo) / (2.0 * h);
    }
    return Tensor::from(x.shape(), std::move(g));
}

} // namespace softprog
