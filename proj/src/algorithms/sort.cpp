#include "softprog/algorithms/sort.hpp"

#include "softprog/errors.hpp"

namespace softprog::algorithms {

namespace {

IndexFn at_counter(std::string counter, int64_t offset) {
    return [counter = std::move(counter), offset](ExecContext&, const State& s) {
        return std::vector<Tensor>{Tensor(s.value(counter) + static_cast<double>(offset))};
    };
}

StatementPtr set_const(const std::string& name, double v) {
    return compute({name},
                   [v](ExecContext&, const State&) { return std::vector<Tensor>{Tensor(v)}; });
}

} // namespace

StatementPtr bubble_sort_program(int64_t length, double mass_eps) {
    using exprs::item;
    auto swap_branch = seq({
        index_read("a_1", "A", IndexMode::exact, at_counter("i", 1)),
        index_read("a_2", "A", IndexMode::exact, at_counter("i", 0)),
        index_assign("A", IndexMode::exact, at_counter("i", 0), exprs::var("a_1")),
        index_assign("A", IndexMode::exact, at_counter("i", 1), exprs::var("a_2")),
        set_const("swapped", 1.0),
        set_const("loss", 1.0),
    });
    auto pass = seq({
        set_const("swapped", 0.0),
        for_loop("i", "n",
                 if_then(cond_gt(item("A", "i", 0), item("A", "i", 1)), swap_branch, nullptr,
                         "swap")),
        compute({"n"},
                [](ExecContext&, const State& s) {
                    return std::vector<Tensor>{s.get("n") - 1.0};
                }),
    });
    // After at most `length` passes the inner bound reaches zero and the
    // swapped flag stays at exactly 0, so the series terminates on its own.
    return while_loop(cond_raw(exprs::var("swapped")), pass, length + 2, mass_eps);
}

SortResult bubble_sort(const Tensor& scores, double beta, RunMode mode, double mass_eps) {
    if (scores.size() < 1) throw structural_error("bubble_sort: at least one score required");
    const int64_t n = scores.size();
    StatementPtr program = bubble_sort_program(n, mass_eps);

    State initial;
    initial.set("A", scores);
    initial.set("swapped", Tensor(1.0));
    initial.set("loss", Tensor(0.0));
    initial.set("a_1", Tensor(0.0));
    initial.set("a_2", Tensor(0.0));
    initial.set("n", Tensor(static_cast<double>(n - 1)));

    SortResult result;
    State final_state = run(program, initial, beta, mode, &result.report);
    result.relaxed_sequence = final_state.get("A");
    result.tracked_loss = final_state.get("loss");

    // Loss per the product formula over every potential swap encountered.
    Tensor sorted_prob(1.0);
    for (const auto& [label, p] : result.report.probes) {
        if (label != "swap") continue;
        result.swap_probabilities.push_back(p);
        sorted_prob = sorted_prob * (1.0 - p);
    }
    result.unsorted_probability = Probability{1.0 - sorted_prob};
    return result;
}

int64_t swap_count_hard(const Tensor& scores) {
    std::vector<double> a = scores.data();
    int64_t swaps = 0;
    int64_t n = static_cast<int64_t>(a.size()) - 1;
    bool swapped = true;
    while (swapped) {
        swapped = false;
        for (int64_t i = 0; i < n; ++i) {
            if (a[static_cast<size_t>(i)] > a[static_cast<size_t>(i + 1)]) {
                std::swap(a[static_cast<size_t>(i)], a[static_cast<size_t>(i + 1)]);
                swapped = true;
                ++swaps;
            }
        }
        n = n - 1;
    }
    return swaps;
}

} // namespace softprog::algorithms
