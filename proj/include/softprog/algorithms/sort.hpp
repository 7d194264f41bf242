#pragma once

#include "softprog/program.hpp"

namespace softprog::algorithms {

struct SortResult {
    Tensor relaxed_sequence;            // blended sequence after the while series
    Probability unsorted_probability;   // 1 - prod(1-p) over all swap probabilities
    Tensor tracked_loss;                // the in-program loss variable (set to 1 in the
                                        // swap branch); equals the product form per path
    std::vector<Tensor> swap_probabilities;
    RunReport report;
};

/// The bubble sort Statement program over variables A/swapped/loss/a_1/a_2/n.
StatementPtr bubble_sort_program(int64_t length, double mass_eps = 1e-12);

/// Relaxed bubble sort: outer While on the swapped flag, inner For with
/// prob_gt comparisons and blended swaps. Hard mode reproduces exact stable
/// bubble sort.
SortResult bubble_sort(const Tensor& scores, double beta, RunMode mode = RunMode::relaxed,
                       double mass_eps = 1e-12);

/// Number of swaps performed by plain discrete bubble sort (== inversion
/// count for distinct scores).
int64_t swap_count_hard(const Tensor& scores);

} // namespace softprog::algorithms
