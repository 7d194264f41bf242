#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "softprog/tensor.hpp"

namespace softprog {

enum class Op : uint8_t {
    leaf,
    add,
    sub,
    mul,
    div,
    neg,
    exp,
    log,
    sqrt,
    abs_smooth,
    pow_scalar,
    sigmoid,
    sum_all,
    mean_all,
    prod_all,
    sum_axis0,
    sum_axis1,
    repeat_rows,
    repeat_cols,
    matmul,
    gather,
    scatter,
    stack,
};

/// One recorded operation. Parents precede the node (topological order by
/// construction); saved buffers are shared with the Tensors that produced
/// them, so recording is cheap.
struct TapeNode {
    Op op = Op::leaf;
    int32_t a = -1;
    int32_t b = -1;
    int64_t size = 0;
    double aux = 0.0;             // beta / exponent, op dependent
    int32_t rows = 0;             // structural dims (axis extents, matmul m)
    int32_t cols = 0;             // matmul n
    int32_t inner = 0;            // matmul k
    std::shared_ptr<const std::vector<double>> va;   // saved forward values
    std::shared_ptr<const std::vector<double>> vb;
    std::shared_ptr<const std::vector<double>> vr;
    std::shared_ptr<const std::vector<int64_t>> idx; // gather/scatter indices
    std::vector<int32_t> parents;                    // stack operands
};

class GradientMap;

/// Append-only record of operations for reverse-mode differentiation.
/// Single-owner: a tape must not be shared across concurrent executions.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Tracked copy of a value; the returned tensor is a differentiation leaf.
    Tensor leaf(const Tensor& value);

    /// Reverse sweep from a scalar loss. Visits each node exactly once and is
    /// deterministic; the tape stays valid for further forward operations.
    GradientMap backward(const Tensor& loss) const;

    size_t num_nodes() const { return nodes_.size(); }

    // Internal: used by the op layer.
    int32_t record(TapeNode node);
    Tensor attach(Shape shape, std::shared_ptr<const std::vector<double>> data, int32_t node) {
        return Tensor(std::move(shape), std::move(data), this, node);
    }

private:
    std::vector<TapeNode> nodes_;
};

/// Accumulated gradients for all reached nodes of one backward pass.
class GradientMap {
public:
    /// Gradient of the loss wrt. a tracked tensor; zeros when the tensor did
    /// not influence the loss.
    Tensor grad(const Tensor& t) const;

private:
    friend class Tape;
    std::vector<std::vector<double>> grads_;
    const Tape* tape_ = nullptr;
};

} // namespace softprog
