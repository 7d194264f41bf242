#pragma once

#include <functional>

#include "softprog/tape.hpp"
#include "softprog/tensor.hpp"

namespace softprog {

// Elementwise operations. Shapes must match, or one operand may be a single
// element (broadcast of scalars only). Results are recorded on the tape when
// any input is tracked.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
/// |x| computed as sqrt(x^2 + 1e-24); gradient defined everywhere.
Tensor abs_smooth(const Tensor& a);
Tensor pow_scalar(const Tensor& a, double exponent);

/// Logistic sigmoid 1/(1+e^(-beta*x)) in a branch-per-sign stable form.
/// stable_sigmoid(x) + stable_sigmoid(-x) == 1 exactly.
Tensor stable_sigmoid(const Tensor& x, double beta);
/// sech^2(beta*x/2), computed as 4*s*(1-s) with s = stable_sigmoid(x, beta).
Tensor sech2_half(const Tensor& x, double beta);
/// Softmax with max-subtraction. Rank-1 tensors normalize over the whole
/// vector; rank-2 tensors normalize along `axis`.
Tensor softmax(const Tensor& x, double beta, int axis = 0);

Tensor reduce_sum(const Tensor& x);
Tensor reduce_mean(const Tensor& x);
/// Product of all entries; gradient uses per-element exclusion products so
/// zero entries are handled exactly.
Tensor reduce_prod(const Tensor& x);
/// Rank-2 reduction along one axis. axis=0: (r,c)->(c); axis=1: (r,c)->(r).
Tensor sum_axis(const Tensor& x, int axis);
Tensor repeat_rows(const Tensor& v, int64_t rows); // (c) -> (rows,c)
Tensor repeat_cols(const Tensor& v, int64_t cols); // (r) -> (r,cols)

/// Rank<=2 matrix product; rank-1 operands are treated as 1xN / Nx1.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Same forward value, no gradient flow to the input.
Tensor detach(const Tensor& x);

/// out[t] = x[idx[t]]; differentiable wrt. x.
Tensor gather(const Tensor& x, std::vector<int64_t> idx, Shape out_shape);
/// Copy of x with x[pos[t]] = values[t] (values may be a broadcast scalar).
/// Positions must be distinct.
Tensor scatter_set(const Tensor& x, std::vector<int64_t> pos, const Tensor& values);
/// Single tracked element as a scalar tensor.
Tensor element(const Tensor& x, int64_t flat);
Tensor element2(const Tensor& x, int64_t row, int64_t col);
/// Stack single-element tensors into a rank-1 tensor.
Tensor stack_scalars(const std::vector<Tensor>& xs);

// Untracked exact helpers for hard mode and oracles.
int64_t hard_argmax(const Tensor& x);
int64_t hard_argmin(const Tensor& x);
double hard_max(const Tensor& x);
double hard_min(const Tensor& x);

/// Central-difference gradient estimate of a scalar-valued function.
Tensor finite_difference_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                              double h = 1e-5);

// Test hook: names ("stable_sigmoid") whose backward rule is deliberately
// perturbed, to exercise gradcheck failure reporting.
void set_gradient_fault(const std::string& op_name);
void clear_gradient_fault();

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator+(const Tensor& a, double b) { return add(a, Tensor(b)); }
inline Tensor operator+(double a, const Tensor& b) { return add(Tensor(a), b); }
inline Tensor operator-(const Tensor& a, double b) { return sub(a, Tensor(b)); }
inline Tensor operator-(double a, const Tensor& b) { return sub(Tensor(a), b); }
inline Tensor operator*(const Tensor& a, double b) { return mul(a, Tensor(b)); }
inline Tensor operator*(double a, const Tensor& b) { return mul(Tensor(a), b); }
inline Tensor operator/(const Tensor& a, double b) { return div(a, Tensor(b)); }
inline Tensor operator/(double a, const Tensor& b) { return div(Tensor(a), b); }

} // namespace softprog
