#include "softprog/algorithms/levenshtein.hpp"

#include "softprog/errors.hpp"

namespace softprog::algorithms {

namespace {

Expr string_row(std::string var, std::string counter) {
    return [var = std::move(var), counter = std::move(counter)](ExecContext&, const State& s) {
        const Tensor& str = s.get(var);
        const int64_t k = str.shape()[1];
        const int64_t i = static_cast<int64_t>(s.value(counter));
        std::vector<int64_t> idx(static_cast<size_t>(k));
        for (int64_t c = 0; c < k; ++c) idx[static_cast<size_t>(c)] = i * k + c;
        return gather(str, std::move(idx), {k});
    };
}

IndexFn cell(std::string row_counter, int64_t row_off, std::string col_counter, int64_t col_off) {
    return [=](ExecContext&, const State& s) {
        return std::vector<Tensor>{Tensor(s.value(row_counter) + row_off),
                                   Tensor(s.value(col_counter) + col_off)};
    };
}

} // namespace

StatementPtr levenshtein_program(int64_t len_a, int64_t len_b, bool one_hot) {
    auto set_subs = [](double v) {
        return compute({"subs_cost"},
                       [v](ExecContext&, const State&) { return std::vector<Tensor>{Tensor(v)}; });
    };

    // d[i+1, 0] = i+1 and d[0, j+1] = j+1 with hard integer costs
    auto init_col = for_loop(
        "i", len_a,
        index_assign("d", IndexMode::exact,
                     [](ExecContext&, const State& s) {
                         return std::vector<Tensor>{Tensor(s.value("i") + 1), Tensor(0.0)};
                     },
                     [](ExecContext&, const State& s) { return Tensor(s.value("i") + 1); }));
    auto init_row = for_loop(
        "j", len_b,
        index_assign("d", IndexMode::exact,
                     [](ExecContext&, const State& s) {
                         return std::vector<Tensor>{Tensor(0.0), Tensor(s.value("j") + 1)};
                     },
                     [](ExecContext&, const State& s) { return Tensor(s.value("j") + 1); }));

    Expr cell_min = [](ExecContext& ctx, const State& s) {
        const Tensor& d = s.get("d");
        const int64_t i = static_cast<int64_t>(s.value("i"));
        const int64_t j = static_cast<int64_t>(s.value("j"));
        Tensor del = element2(d, i, j + 1) + 1.0;
        Tensor ins = element2(d, i + 1, j) + 1.0;
        Tensor sub = element2(d, i, j) + s.get("subs_cost");
        return ctx.minimum(stack_scalars({del, ins, sub}));
    };

    auto inner = seq({
        if_then(cond_cat_eq(string_row("s", "i"), string_row("t", "j"), one_hot), set_subs(0.0),
                set_subs(1.0)),
        index_assign("d", IndexMode::exact, cell("i", 1, "j", 1), cell_min),
    });

    return seq({init_col, init_row, for_loop("i", len_a, for_loop("j", len_b, inner))});
}

LDResult levenshtein(const std::vector<CategoricalDistribution>& a,
                     const std::vector<CategoricalDistribution>& b, double beta, RunMode mode,
                     bool one_hot) {
    const int64_t na = static_cast<int64_t>(a.size());
    const int64_t nb = static_cast<int64_t>(b.size());
    int64_t alphabet = -1;
    auto pack = [&](const std::vector<CategoricalDistribution>& str, int64_t len) {
        std::vector<Tensor> rows;
        Tape* tape = nullptr;
        for (const auto& c : str) {
            if (alphabet < 0) alphabet = c.categories();
            if (c.categories() != alphabet)
                throw structural_error("levenshtein: alphabet sizes differ");
            if (c.weights.tracked()) tape = c.weights.tape();
            for (int64_t k = 0; k < alphabet; ++k) rows.push_back(element(c.weights, k));
        }
        if (rows.empty()) return Tensor::zeros({0, std::max<int64_t>(alphabet, 1)});
        (void)tape;
        return stack_scalars(rows).reshaped({len, alphabet});
    };
    Tensor s = pack(a, na);
    Tensor t = pack(b, nb);
    if (alphabet < 0) alphabet = 1;

    State initial;
    initial.set("s", s);
    initial.set("t", t);
    initial.set("d", Tensor::zeros({na + 1, nb + 1}));
    initial.set("subs_cost", Tensor(0.0));

    LDResult result;
    State out = run(levenshtein_program(na, nb, one_hot), initial, beta, mode, &result.report);
    result.dp_matrix = out.get("d");
    result.distance = element2(result.dp_matrix, na, nb);
    return result;
}

} // namespace softprog::algorithms
