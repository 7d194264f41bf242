#pragma once

#include "softprog/program.hpp"

namespace softprog::algorithms {

struct LDResult {
    Tensor dp_matrix; // (len_a+1) x (len_b+1)
    Tensor distance;  // dp_matrix[len_a, len_b]
    RunReport report;
};

/// The dynamic-programming Statement program for strings of the given lengths.
/// Expects state variables s (len_a x alphabet), t (len_b x alphabet), d, and
/// subs_cost.
StatementPtr levenshtein_program(int64_t len_a, int64_t len_b, bool one_hot);

/// Relaxed Levenshtein distance over categorical strings. Border cells carry
/// hard integer costs; each interior cell takes the (soft) minimum of the
/// deletion/insertion/substitution moves, with the substitution cost blended
/// by the relaxed equality of the two characters. one_hot selects the
/// inner-product equality branch (valid when b is one-hot).
LDResult levenshtein(const std::vector<CategoricalDistribution>& a,
                     const std::vector<CategoricalDistribution>& b, double beta,
                     RunMode mode = RunMode::relaxed, bool one_hot = false);

} // namespace softprog::algorithms
