#pragma once

#include "softprog/ops.hpp"

namespace softprog {

/// Scalar tensor in [0,1] produced by relaxed comparators and consumed by
/// branch/loop weighting.
struct Probability {
    Tensor value;
    double item() const { return value.item(); }
};

/// Weights over n categories; entries >= 0, summing to ~1. One-hot vectors
/// are the special case with a single unit entry.
struct CategoricalDistribution {
    Tensor weights;
    int64_t categories() const { return weights.size(); }
};

// Relaxed comparators: the probability of the comparison holding under
// logistic perturbation of the compared quantity.
Probability prob_lt(const Tensor& a, const Tensor& b, double beta);
Probability prob_gt(const Tensor& a, const Tensor& b, double beta);
Probability prob_eq(const Tensor& a, const Tensor& b, double beta);

// Conjunction/disjunction of independent events: product and probabilistic
// sum. Inputs are not clamped (that would silently cut gradient flow); a
// debug check warns when a value leaves [0,1].
Probability prob_and(const Probability& p, const Probability& q);
Probability prob_or(const Probability& p, const Probability& q);
Probability prob_not(const Probability& p);

/// Multinomial logistic (softmax) relaxation of argmax.
CategoricalDistribution soft_argmax(const Tensor& x, double beta);
/// Inner product of the softmax weights with the vector itself.
Tensor soft_max(const Tensor& x, double beta);
Tensor soft_min(const Tensor& x, double beta);

/// Equality of categorical distributions: inner product when y is one-hot,
/// cosine similarity of L2-normalized inputs otherwise. The branch is chosen
/// by the caller; detecting one-hotness of relaxed values at runtime is
/// ill-defined.
Probability cat_prob_eq(const CategoricalDistribution& x, const CategoricalDistribution& y,
                        bool y_is_one_hot);

} // namespace softprog
