#include "softprog/program.hpp"

#include <cmath>

#include "softprog/errors.hpp"
#include "softprog/warnings.hpp"

namespace softprog {

const Tensor& State::get(const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw structural_error("unbound variable '" + name + "'");
    return it->second;
}

void ExecContext::warn(const std::string& message) {
    if (report_)
        report_->warnings.push_back(message);
    else
        emit_warning(message);
}

Tensor ExecContext::minimum(const Tensor& xs) {
    if (hard()) return element(xs, hard_argmin(xs));
    note_relaxed_accesses(xs.size());
    return soft_min(xs, beta_);
}

Tensor ExecContext::maximum(const Tensor& xs) {
    if (hard()) return element(xs, hard_argmax(xs));
    note_relaxed_accesses(xs.size());
    return soft_max(xs, beta_);
}

Tensor ExecContext::argmin_weights(const Tensor& xs, int axis) {
    if (!hard()) {
        note_relaxed_accesses(xs.size());
        return softmax(neg(xs), beta_, axis);
    }
    std::vector<double> w(static_cast<size_t>(xs.size()), 0.0);
    if (xs.rank() <= 1) {
        w[static_cast<size_t>(hard_argmin(xs))] = 1.0;
    } else {
        const int64_t r = xs.shape()[0], c = xs.shape()[1];
        if (axis == 0) {
            for (int64_t j = 0; j < c; ++j) {
                int64_t best = 0;
                for (int64_t i = 1; i < r; ++i)
                    if (xs.at(i, j) < xs.at(best, j)) best = i;
                w[static_cast<size_t>(best * c + j)] = 1.0;
            }
        } else {
            for (int64_t i = 0; i < r; ++i) {
                int64_t best = 0;
                for (int64_t j = 1; j < c; ++j)
                    if (xs.at(i, j) < xs.at(i, best)) best = j;
                w[static_cast<size_t>(i * c + best)] = 1.0;
            }
        }
    }
    return Tensor::from(xs.shape(), std::move(w));
}

Condition cond_lt(Expr a, Expr b) { return Condition{ConditionKind::lt, std::move(a), std::move(b)}; }
Condition cond_gt(Expr a, Expr b) { return Condition{ConditionKind::gt, std::move(a), std::move(b)}; }
Condition cond_eq(Expr a, Expr b) { return Condition{ConditionKind::eq, std::move(a), std::move(b)}; }
Condition cond_cat_eq(Expr a, Expr b, bool rhs_one_hot) {
    return Condition{ConditionKind::cat_eq, std::move(a), std::move(b), rhs_one_hot};
}
Condition cond_raw(Expr p) { return Condition{ConditionKind::raw_probability, std::move(p), {}}; }

StatementPtr seq(std::vector<StatementPtr> children) {
    for (const auto& c : children)
        if (!c) throw structural_error("seq: null child statement");
    return std::make_shared<const Statement>(SequenceStmt{std::move(children)});
}

StatementPtr compute(std::vector<std::string> writes, ComputeFn fn) {
    if (writes.empty()) throw structural_error("compute: at least one written variable required");
    return std::make_shared<const Statement>(ComputeStmt{std::move(writes), std::move(fn)});
}

StatementPtr if_then(Condition cond, StatementPtr then_branch, StatementPtr else_branch,
                     std::string probe) {
    if (!then_branch) throw structural_error("if_then: null then-branch");
    return std::make_shared<const Statement>(
        IfStmt{std::move(cond), std::move(then_branch), std::move(else_branch), std::move(probe)});
}

StatementPtr while_loop(Condition cond, StatementPtr body, int64_t max_iter, double mass_eps,
                        bool exact_condition) {
    if (!body) throw structural_error("while_loop: null body");
    if (max_iter < 1) throw structural_error("while_loop: max_iter must be >= 1");
    if (mass_eps <= 0.0 || mass_eps >= 1.0)
        throw structural_error("while_loop: mass_eps must be in (0,1)");
    return std::make_shared<const Statement>(
        WhileStmt{std::move(cond), std::move(body), max_iter, mass_eps, exact_condition});
}

StatementPtr for_loop(std::string counter, BoundFn bound, StatementPtr body) {
    if (!body) throw structural_error("for_loop: null body");
    return std::make_shared<const Statement>(
        ForStmt{std::move(counter), std::move(bound), std::move(body)});
}

StatementPtr for_loop(std::string counter, int64_t bound, StatementPtr body) {
    return for_loop(std::move(counter), [bound](const State&) { return bound; }, std::move(body));
}

namespace {

int64_t integral_value(double v, const char* what) {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9)
        throw structural_error(std::string(what) + ": value " + std::to_string(v) +
                               " is not an integer");
    return static_cast<int64_t>(r);
}

} // namespace

StatementPtr for_loop(std::string counter, std::string bound_var, StatementPtr body) {
    return for_loop(
        std::move(counter),
        [bound_var](const State& s) { return integral_value(s.value(bound_var), "For bound"); },
        std::move(body));
}

StatementPtr index_read(std::string target, std::string source, IndexMode mode, IndexFn index) {
    return std::make_shared<const Statement>(
        IndexReadStmt{std::move(target), std::move(source), mode, std::move(index)});
}

StatementPtr index_assign(std::string target, IndexMode mode, IndexFn index, Expr value) {
    return std::make_shared<const Statement>(
        IndexAssignStmt{std::move(target), mode, std::move(index), std::move(value)});
}

namespace exprs {

Expr var(std::string name) {
    return [name = std::move(name)](ExecContext&, const State& s) { return s.get(name); };
}

Expr cst(double v) {
    return [v](ExecContext&, const State&) { return Tensor(v); };
}

Expr item(std::string array, std::string counter, int64_t offset) {
    return [array = std::move(array), counter = std::move(counter), offset](ExecContext&,
                                                                            const State& s) {
        const int64_t i = integral_value(s.value(counter), "item index") + offset;
        return element(s.get(array), i);
    };
}

} // namespace exprs

Probability eval_condition(const Condition& cond, const State& s, ExecContext& ctx) {
    switch (cond.kind) {
        case ConditionKind::lt:
        case ConditionKind::gt:
        case ConditionKind::eq: {
            Tensor a = cond.lhs(ctx, s);
            Tensor b = cond.rhs(ctx, s);
            if (a.size() != 1 || b.size() != 1)
                throw structural_error("condition operands must be scalars");
            if (ctx.hard()) {
                bool truth = false;
                if (cond.kind == ConditionKind::lt) truth = a.item() < b.item();
                if (cond.kind == ConditionKind::gt) truth = a.item() > b.item();
                if (cond.kind == ConditionKind::eq) truth = a.item() == b.item();
                return Probability{Tensor(truth ? 1.0 : 0.0)};
            }
            ctx.note_relaxed_accesses(2);
            if (cond.kind == ConditionKind::lt) return prob_lt(a, b, ctx.beta());
            if (cond.kind == ConditionKind::gt) return prob_gt(a, b, ctx.beta());
            return prob_eq(a, b, ctx.beta());
        }
        case ConditionKind::cat_eq: {
            Tensor a = cond.lhs(ctx, s);
            Tensor b = cond.rhs(ctx, s);
            if (ctx.hard())
                return Probability{Tensor(hard_argmax(a) == hard_argmax(b) ? 1.0 : 0.0)};
            ctx.note_relaxed_accesses(2);
            return cat_prob_eq(CategoricalDistribution{a}, CategoricalDistribution{b},
                               cond.rhs_one_hot);
        }
        case ConditionKind::raw_probability: {
            Tensor p = cond.lhs(ctx, s);
            if (p.size() != 1) throw structural_error("raw condition must be a scalar");
            if (ctx.hard()) return Probability{Tensor(p.item() > 0.5 ? 1.0 : 0.0)};
            ctx.note_relaxed_accesses(1);
            if (debug_checks_enabled() && (p.item() < -1e-9 || p.item() > 1.0 + 1e-9))
                ctx.warn("raw condition value outside [0,1]: " + std::to_string(p.item()));
            return Probability{p};
        }
    }
    throw structural_error("unknown condition kind");
}

namespace {

State run_statement(const StatementPtr& stmt, const State& s, ExecContext& ctx);

bool condition_is_true_hard(const Condition& cond, const State& s, ExecContext& ctx) {
    ExecContext hard_ctx(ctx.beta(), RunMode::hard, ctx.report());
    return eval_condition(cond, s, hard_ctx).item() == 1.0;
}

State blend_two(const Probability& p, const State& then_state, const State& else_state) {
    // Degenerate blends keep exact branch values (and gradients: the sigmoid
    // factor is exactly zero at saturation).
    const double pv = p.value.item();
    for (const auto& [name, tv] : then_state.variables())
        if (!else_state.has(name))
            throw structural_error("execute_if: variable '" + name +
                                   "' written in only one branch (pre-declare it)");
    for (const auto& [name, fv] : else_state.variables())
        if (!then_state.has(name))
            throw structural_error("execute_if: variable '" + name +
                                   "' written in only one branch (pre-declare it)");
    if (pv == 1.0) return then_state;
    if (pv == 0.0) return else_state;

    Tensor q = 1.0 - p.value;
    State out;
    for (const auto& [name, tv] : then_state.variables()) {
        const Tensor& fv = else_state.get(name);
        if (tv.identical(fv)) {
            out.set(name, tv);
            continue;
        }
        if (!tv.same_shape(fv))
            throw structural_error("execute_if: variable '" + name +
                                   "' has mismatched shapes across branches");
        out.set(name, p.value * tv + q * fv);
    }
    return out;
}

State execute_if_impl(const IfStmt& node, const State& s, ExecContext& ctx) {
    Probability p = eval_condition(node.cond, s, ctx);
    if (!node.probe.empty() && ctx.report()) ctx.report()->probes.emplace_back(node.probe, p.value);
    if (ctx.hard()) {
        if (p.item() == 1.0) return run_statement(node.then_branch, s, ctx);
        return node.else_branch ? run_statement(node.else_branch, s, ctx) : s;
    }
    State then_state = run_statement(node.then_branch, s, ctx);
    State else_state = node.else_branch ? run_statement(node.else_branch, s, ctx) : s;
    return blend_two(p, then_state, else_state);
}

void accumulate_weighted(std::map<std::string, Tensor>& acc, const Tensor& w, const State& s,
                         const State& reference) {
    if (s.variables().size() != reference.variables().size())
        throw structural_error("execute_while: loop body changed the variable set");
    for (const auto& [name, v] : s.variables()) {
        if (!reference.has(name))
            throw structural_error("execute_while: loop body introduced variable '" + name + "'");
        auto it = acc.find(name);
        if (it == acc.end())
            acc.emplace(name, w * v);
        else
            it->second = it->second + w * v;
    }
}

State execute_while_impl(const WhileStmt& node, const State& s, ExecContext& ctx) {
    // Exact-condition loops (and all hard-mode loops) run like ordinary
    // data-dependent loops: no series weighting.
    if (node.exact_condition || ctx.hard()) {
        State current = s;
        for (int64_t i = 0;; ++i) {
            if (!condition_is_true_hard(node.cond, current, ctx)) return current;
            if (i == node.max_iter) {
                ctx.warn("while: truncated at max_iter=" + std::to_string(node.max_iter) +
                         " with the condition still true");
                return current;
            }
            current = run_statement(node.body, current, ctx);
        }
    }

    std::map<std::string, Tensor> acc;
    State current = s;
    Tensor reach(1.0);
    for (int64_t i = 0;; ++i) {
        Probability c = eval_condition(node.cond, current, ctx);
        Tensor reach_next = reach * c.value;
        const bool out_of_mass = reach_next.item() < node.mass_eps;
        const bool out_of_iters = i == node.max_iter;
        if (out_of_mass || out_of_iters) {
            // Residual mass is assigned to the last computed state, so the
            // emitted weights always form a convex combination.
            accumulate_weighted(acc, reach, current, s);
            if (out_of_iters && !out_of_mass && reach_next.item() >= 0.01)
                ctx.warn("while: truncated at max_iter=" + std::to_string(node.max_iter) +
                         " with residual mass " + std::to_string(reach_next.item()));
            break;
        }
        accumulate_weighted(acc, reach * (1.0 - c.value), current, s);
        current = run_statement(node.body, current, ctx);
        reach = reach_next;
    }
    State out;
    for (auto& [name, v] : acc) out.set(name, v);
    return out;
}

State execute_for_impl(const ForStmt& node, const State& s, ExecContext& ctx) {
    const int64_t bound = node.bound(s);
    if (bound < 0) throw structural_error("for: negative bound");
    State current = s;
    const bool shadowed = s.has(node.counter);
    Tensor shadowed_value = shadowed ? s.get(node.counter) : Tensor();
    for (int64_t k = 0; k < bound; ++k) {
        current.set(node.counter, Tensor(static_cast<double>(k)));
        current = run_statement(node.body, current, ctx);
    }
    if (shadowed)
        current.set(node.counter, shadowed_value);
    else
        current.erase(node.counter);
    return current;
}

struct ResolvedIndex {
    std::vector<Tensor> axes;
    const Tensor* source;
    Shape shape;
};

ResolvedIndex resolve_index(const std::string& source_name, const IndexFn& index, const State& s,
                            ExecContext& ctx) {
    ResolvedIndex r;
    r.source = &s.get(source_name);
    r.shape = r.source->rank() == 0 ? Shape{1} : r.source->shape();
    r.axes = index(ctx, s);
    if (r.axes.size() != r.shape.size())
        throw structural_error("indexing: one index per axis required for '" + source_name + "'");
    return r;
}

int64_t exact_flat_index(const ResolvedIndex& r) {
    int64_t flat = 0;
    for (size_t k = 0; k < r.axes.size(); ++k) {
        const int64_t j = integral_value(r.axes[k].item(), "exact index");
        if (j < 0 || j >= r.shape[k]) throw structural_error("exact index out of range");
        flat = flat * r.shape[k] + j;
    }
    return flat;
}

int64_t rounded_flat_index(const ResolvedIndex& r) {
    int64_t flat = 0;
    for (size_t k = 0; k < r.axes.size(); ++k) {
        int64_t j = static_cast<int64_t>(std::llround(r.axes[k].item()));
        j = std::max<int64_t>(0, std::min(r.shape[k] - 1, j));
        flat = flat * r.shape[k] + j;
    }
    return flat;
}

std::vector<CategoricalDistribution> axis_distributions(const ResolvedIndex& r) {
    std::vector<CategoricalDistribution> dists;
    dists.reserve(r.axes.size());
    for (const auto& a : r.axes) dists.push_back(CategoricalDistribution{a});
    return dists;
}

int64_t argmax_flat_index(const ResolvedIndex& r) {
    int64_t flat = 0;
    for (size_t k = 0; k < r.axes.size(); ++k) {
        const int64_t j = hard_argmax(r.axes[k]);
        flat = flat * r.shape[k] + j;
    }
    return flat;
}

State execute_index_read(const IndexReadStmt& node, const State& s, ExecContext& ctx) {
    ResolvedIndex r = resolve_index(node.source, node.index, s, ctx);
    Tensor value;
    switch (node.mode) {
        case IndexMode::exact:
            value = element(*r.source, exact_flat_index(r));
            break;
        case IndexMode::real:
            if (ctx.hard()) {
                value = element(*r.source, rounded_flat_index(r));
            } else {
                ctx.note_relaxed_accesses(static_cast<int64_t>(r.axes.size()));
                value = read_real(*r.source, r.axes, ctx.beta());
            }
            break;
        case IndexMode::categorical:
            if (ctx.hard()) {
                value = element(*r.source, argmax_flat_index(r));
            } else {
                ctx.note_relaxed_accesses(static_cast<int64_t>(r.axes.size()));
                value = read_categorical(*r.source, axis_distributions(r));
            }
            break;
    }
    State out = s;
    out.set(node.target, std::move(value));
    return out;
}

State execute_index_assign(const IndexAssignStmt& node, const State& s, ExecContext& ctx) {
    ResolvedIndex r = resolve_index(node.target, node.index, s, ctx);
    Tensor v = node.value(ctx, s);
    if (v.size() != 1) throw structural_error("index assign: value must be a scalar");
    Tensor updated;
    switch (node.mode) {
        case IndexMode::exact:
            updated = scatter_set(*r.source, {exact_flat_index(r)}, v);
            break;
        case IndexMode::real:
            throw structural_error("index assign: real-valued writes are not defined");
        case IndexMode::categorical:
            if (ctx.hard()) {
                updated = scatter_set(*r.source, {argmax_flat_index(r)}, v);
            } else {
                ctx.note_relaxed_accesses(static_cast<int64_t>(r.axes.size()));
                updated = write_categorical(*r.source, axis_distributions(r), v);
            }
            break;
    }
    State out = s;
    out.set(node.target, std::move(updated));
    return out;
}

State run_statement(const StatementPtr& stmt, const State& s, ExecContext& ctx) {
    if (!stmt) throw structural_error("run: null statement");
    return std::visit(
        [&](const auto& node) -> State {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, SequenceStmt>) {
                State current = s;
                for (const auto& child : node.children) current = run_statement(child, current, ctx);
                return current;
            } else if constexpr (std::is_same_v<T, ComputeStmt>) {
                std::vector<Tensor> results = node.fn(ctx, s);
                if (results.size() != node.writes.size())
                    throw structural_error("compute: result count does not match written variables");
                State out = s;
                for (size_t k = 0; k < results.size(); ++k)
                    out.set(node.writes[k], std::move(results[k]));
                return out;
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                return execute_if_impl(node, s, ctx);
            } else if constexpr (std::is_same_v<T, WhileStmt>) {
                return execute_while_impl(node, s, ctx);
            } else if constexpr (std::is_same_v<T, ForStmt>) {
                return execute_for_impl(node, s, ctx);
            } else if constexpr (std::is_same_v<T, IndexReadStmt>) {
                return execute_index_read(node, s, ctx);
            } else {
                return execute_index_assign(node, s, ctx);
            }
        },
        stmt->node());
}

} // namespace

State run(const StatementPtr& program, const State& initial, double beta, RunMode mode,
          RunReport* report) {
    if (beta <= 0.0) throw parameter_error("run: beta must be positive");
    ExecContext ctx(beta, mode, report);
    return run_statement(program, initial, ctx);
}

State execute_if(const Condition& cond, const StatementPtr& f, const StatementPtr& g,
                 const State& s, double beta, RunMode mode, RunReport* report) {
    ExecContext ctx(beta, mode, report);
    return execute_if_impl(IfStmt{cond, f, g, ""}, s, ctx);
}

State execute_while(const Condition& cond, const StatementPtr& body, const State& s, double beta,
                    int64_t max_iter, double mass_eps, RunMode mode, RunReport* report) {
    ExecContext ctx(beta, mode, report);
    return execute_while_impl(WhileStmt{cond, body, max_iter, mass_eps, false}, s, ctx);
}

State execute_for(const std::string& counter, int64_t bound, const StatementPtr& body,
                  const State& s, double beta, RunMode mode, RunReport* report) {
    ExecContext ctx(beta, mode, report);
    return execute_for_impl(ForStmt{counter, [bound](const State&) { return bound; }, body}, s,
                            ctx);
}

State merge_states(const std::vector<Probability>& weights, const std::vector<State>& states) {
    if (weights.size() != states.size() || states.empty())
        throw structural_error("merge_states: one weight per state required");
    double total = 0;
    for (const auto& w : weights) total += w.item();
    if (std::abs(total - 1.0) > 1e-6)
        throw structural_error("merge_states: weights must sum to 1");
    const State& ref = states.front();
    for (const auto& s : states) {
        if (s.variables().size() != ref.variables().size())
            throw structural_error("merge_states: variable sets differ");
        for (const auto& [name, v] : s.variables()) {
            if (!ref.has(name)) throw structural_error("merge_states: variable sets differ");
            if (!v.same_shape(ref.get(name)))
                throw structural_error("merge_states: variable shapes differ");
        }
    }
    State out;
    for (const auto& [name, first] : ref.variables()) {
        Tensor acc = weights[0].value * first;
        for (size_t k = 1; k < states.size(); ++k)
            acc = acc + weights[k].value * states[k].get(name);
        out.set(name, acc);
    }
    return out;
}

int64_t count_relaxed_accesses(const StatementPtr& program, const State& initial, double beta) {
    RunReport report;
    run(program, initial, beta, RunMode::relaxed, &report);
    return report.relaxed_accesses;
}

} // namespace softprog
