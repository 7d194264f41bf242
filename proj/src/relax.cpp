#include "softprog/relax.hpp"

#include <iostream>
#include <mutex>

#include "softprog/errors.hpp"
#include "softprog/warnings.hpp"

namespace softprog {

namespace {

WarningHandler g_warning_handler;
std::mutex g_warning_mutex;

void check_probability(const Probability& p, const char* where) {
    if (!debug_checks_enabled()) return;
    const double v = p.value.item();
    if (v < -1e-9 || v > 1.0 + 1e-9)
        emit_warning(std::string(where) + ": probability outside [0,1]: " + std::to_string(v));
}

} // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard<std::mutex> lock(g_warning_mutex);
    WarningHandler prev = g_warning_handler;
    g_warning_handler = std::move(handler);
    return prev;
}

void emit_warning(const std::string& message) {
    WarningHandler handler;
    {
        std::lock_guard<std::mutex> lock(g_warning_mutex);
        handler = g_warning_handler;
    }
    if (handler)
        handler(message);
    else
        std::cerr << "[softprog] warning: " << message << "\n";
}

Probability prob_lt(const Tensor& a, const Tensor& b, double beta) {
    if (a.size() != 1 || b.size() != 1)
        throw structural_error("prob_lt: scalar operands required");
    return Probability{stable_sigmoid(b - a, beta)};
}

Probability prob_gt(const Tensor& a, const Tensor& b, double beta) { return prob_lt(b, a, beta); }

Probability prob_eq(const Tensor& a, const Tensor& b, double beta) {
    if (a.size() != 1 || b.size() != 1)
        throw structural_error("prob_eq: scalar operands required");
    return Probability{sech2_half(b - a, beta)};
}

Probability prob_and(const Probability& p, const Probability& q) {
    check_probability(p, "prob_and");
    check_probability(q, "prob_and");
    return Probability{p.value * q.value};
}

Probability prob_or(const Probability& p, const Probability& q) {
    check_probability(p, "prob_or");
    check_probability(q, "prob_or");
    return Probability{p.value + q.value - p.value * q.value};
}

Probability prob_not(const Probability& p) {
    check_probability(p, "prob_not");
    return Probability{1.0 - p.value};
}

CategoricalDistribution soft_argmax(const Tensor& x, double beta) {
    if (x.size() == 0) throw structural_error("soft_argmax: empty vector");
    if (x.rank() > 1) throw structural_error("soft_argmax: rank-1 tensor required");
    return CategoricalDistribution{softmax(x, beta)};
}

Tensor soft_max(const Tensor& x, double beta) {
    if (x.size() == 0) throw structural_error("soft_max: empty vector");
    return reduce_sum(softmax(x, beta) * x);
}

Tensor soft_min(const Tensor& x, double beta) {
    if (x.size() == 0) throw structural_error("soft_min: empty vector");
    return reduce_sum(softmax(neg(x), beta) * x);
}

Probability cat_prob_eq(const CategoricalDistribution& x, const CategoricalDistribution& y,
                        bool y_is_one_hot) {
    if (x.categories() != y.categories())
        throw structural_error("cat_prob_eq: category counts differ");
    if (y_is_one_hot) return Probability{reduce_sum(x.weights * y.weights)};
    Tensor nx = reduce_sum(x.weights * x.weights);
    Tensor ny = reduce_sum(y.weights * y.weights);
    if (nx.item() == 0.0 || ny.item() == 0.0)
        throw numeric_domain_error("cat_prob_eq: zero-norm distribution in cosine branch");
    return Probability{reduce_sum(x.weights * y.weights) / softprog::sqrt(nx * ny)};
}

} // namespace softprog
