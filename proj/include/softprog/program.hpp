#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "softprog/indexing.hpp"
#include "softprog/relax.hpp"

namespace softprog {

enum class RunMode { relaxed, hard };

/// Named variables of a program. Branch execution is call-by-value: running a
/// statement never mutates the caller's State.
class State {
public:
    State() = default;
    bool has(const std::string& name) const { return vars_.count(name) != 0; }
    const Tensor& get(const std::string& name) const;
    double value(const std::string& name) const { return get(name).item(); }
    void set(const std::string& name, Tensor value) { vars_[name] = std::move(value); }
    void erase(const std::string& name) { vars_.erase(name); }
    const std::map<std::string, Tensor>& variables() const { return vars_; }

private:
    std::map<std::string, Tensor> vars_;
};

/// Per-run diagnostics: truncation warnings, probe-labelled condition
/// probabilities, and a relaxed-access counter (used by the beta heuristic).
struct RunReport {
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, Tensor>> probes;
    int64_t relaxed_accesses = 0;
};

/// Execution services passed to conditions, expressions and compute bodies.
/// Provides the inverse temperature and mode-aware selection primitives.
class ExecContext {
public:
    ExecContext(double beta, RunMode mode, RunReport* report)
        : beta_(beta), mode_(mode), report_(report) {}

    double beta() const { return beta_; }
    RunMode mode() const { return mode_; }
    bool hard() const { return mode_ == RunMode::hard; }
    RunReport* report() { return report_; }

    void note_relaxed_accesses(int64_t n) {
        if (report_ && !hard()) report_->relaxed_accesses += n;
    }
    void warn(const std::string& message);

    /// soft_min over the vector in relaxed mode, exact minimum in hard mode.
    Tensor minimum(const Tensor& xs);
    Tensor maximum(const Tensor& xs);
    /// softmax(-beta x) weights in relaxed mode, one-hot at the argmin in hard
    /// mode. axis applies to rank-2 inputs.
    Tensor argmin_weights(const Tensor& xs, int axis = 0);

private:
    double beta_;
    RunMode mode_;
    RunReport* report_;
};

using Expr = std::function<Tensor(ExecContext&, const State&)>;
using ComputeFn = std::function<std::vector<Tensor>(ExecContext&, const State&)>;
/// One tensor per axis: integer scalars (exact), real scalars (real mode) or
/// weight vectors (categorical mode).
using IndexFn = std::function<std::vector<Tensor>(ExecContext&, const State&)>;
using BoundFn = std::function<int64_t(const State&)>;

enum class ConditionKind { lt, gt, eq, cat_eq, raw_probability };

struct Condition {
    ConditionKind kind;
    Expr lhs;
    Expr rhs;                // unused for raw_probability
    bool rhs_one_hot = false; // cat_eq: rhs is known one-hot
};

Condition cond_lt(Expr a, Expr b);
Condition cond_gt(Expr a, Expr b);
Condition cond_eq(Expr a, Expr b);
Condition cond_cat_eq(Expr a, Expr b, bool rhs_one_hot);
Condition cond_raw(Expr p);

enum class IndexMode { exact, real, categorical };

class Statement;
using StatementPtr = std::shared_ptr<const Statement>;

struct SequenceStmt {
    std::vector<StatementPtr> children;
};
struct ComputeStmt {
    std::vector<std::string> writes;
    ComputeFn fn;
};
struct IfStmt {
    Condition cond;
    StatementPtr then_branch;
    StatementPtr else_branch; // may be null (identity)
    std::string probe;        // when set, the condition probability is recorded
};
struct WhileStmt {
    Condition cond;
    StatementPtr body;
    int64_t max_iter;
    double mass_eps;
    // When set the condition is evaluated as an exact boolean even in relaxed
    // mode: the loop runs like a data-dependent hard loop instead of the
    // weighted series (used for backtraces whose termination criterion is a
    // threshold on accumulated mass).
    bool exact_condition;
};
struct ForStmt {
    std::string counter;
    BoundFn bound;
    StatementPtr body;
};
struct IndexReadStmt {
    std::string target;
    std::string source;
    IndexMode mode;
    IndexFn index;
};
struct IndexAssignStmt {
    std::string target;
    IndexMode mode;
    IndexFn index;
    Expr value;
};

/// Immutable AST node; safely shared across concurrent runs.
class Statement {
public:
    using Node = std::variant<SequenceStmt, ComputeStmt, IfStmt, WhileStmt, ForStmt, IndexReadStmt,
                              IndexAssignStmt>;
    explicit Statement(Node node) : node_(std::move(node)) {}
    const Node& node() const { return node_; }

private:
    Node node_;
};

// Builders.
StatementPtr seq(std::vector<StatementPtr> children);
StatementPtr compute(std::vector<std::string> writes, ComputeFn fn);
StatementPtr if_then(Condition cond, StatementPtr then_branch, StatementPtr else_branch = nullptr,
                     std::string probe = "");
StatementPtr while_loop(Condition cond, StatementPtr body, int64_t max_iter,
                        double mass_eps = 1e-6, bool exact_condition = false);
StatementPtr for_loop(std::string counter, BoundFn bound, StatementPtr body);
StatementPtr for_loop(std::string counter, int64_t bound, StatementPtr body);
StatementPtr for_loop(std::string counter, std::string bound_var, StatementPtr body);
StatementPtr index_read(std::string target, std::string source, IndexMode mode, IndexFn index);
StatementPtr index_assign(std::string target, IndexMode mode, IndexFn index, Expr value);

namespace exprs {
Expr var(std::string name);
Expr cst(double v);
/// Element of a rank-1 variable at an exact integer offset of a counter.
Expr item(std::string array, std::string counter, int64_t offset = 0);
} // namespace exprs

/// Relaxed probability (or exact boolean in hard mode) of a condition.
Probability eval_condition(const Condition& cond, const State& s, ExecContext& ctx);

/// Execute a program. Relaxed mode returns the merged expectation-approximating
/// state; hard mode executes conditions as exact booleans with identical
/// control structure. Both are deterministic.
State run(const StatementPtr& program, const State& initial, double beta, RunMode mode,
          RunReport* report = nullptr);

/// Convex combination of branch results by the condition probability.
State execute_if(const Condition& cond, const StatementPtr& f, const StatementPtr& g,
                 const State& s, double beta, RunMode mode = RunMode::relaxed,
                 RunReport* report = nullptr);

/// Weighted series over loop unrollings (Eq.-style while relaxation); stops
/// when the remaining reach probability drops below mass_eps or max_iter is
/// hit, assigning the residual mass to the last computed state.
State execute_while(const Condition& cond, const StatementPtr& body, const State& s, double beta,
                    int64_t max_iter, double mass_eps = 1e-6, RunMode mode = RunMode::relaxed,
                    RunReport* report = nullptr);

/// Unrolled loop with an exact integer counter (the counter is not relaxed).
State execute_for(const std::string& counter, int64_t bound, const StatementPtr& body,
                  const State& s, double beta, RunMode mode = RunMode::relaxed,
                  RunReport* report = nullptr);

/// Per-variable convex combination; weights must sum to 1 within 1e-6.
State merge_states(const std::vector<Probability>& weights, const std::vector<State>& states);

/// Instrumented relaxed dry run counting relaxed accesses (for beta = sqrt(k)).
int64_t count_relaxed_accesses(const StatementPtr& program, const State& initial, double beta);

} // namespace softprog
