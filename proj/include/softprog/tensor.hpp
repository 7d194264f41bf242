#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <vector>

namespace softprog {

class Tape;

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);

/// Shaped fp64 value array, optionally attached to a gradient tape node.
/// Tensors are immutable values: every operation produces a new Tensor and
/// buffers are shared, so copying a Tensor is cheap.
class Tensor {
public:
    Tensor() : Tensor(0.0) {}
    explicit Tensor(double v);

    static Tensor scalar(double v) { return Tensor(v); }
    static Tensor from(Shape shape, std::vector<double> data);
    static Tensor vector(std::vector<double> data);
    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double v);

    const Shape& shape() const { return shape_; }
    int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
    int64_t size() const { return static_cast<int64_t>(data_->size()); }
    bool is_scalar() const { return size() == 1; }

    const std::vector<double>& data() const { return *data_; }
    const std::shared_ptr<const std::vector<double>>& buffer() const { return data_; }
    double operator[](int64_t flat) const { return (*data_)[static_cast<size_t>(flat)]; }
    /// Value of a single-element tensor.
    double item() const;
    /// Element at (row, col) of a rank-2 tensor.
    double at(int64_t row, int64_t col) const;

    bool tracked() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int32_t node() const { return node_; }

    /// Same buffer and tape node under a new shape of equal element count.
    Tensor reshaped(Shape new_shape) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    /// True when both tensors refer to the same buffer and tape node.
    bool identical(const Tensor& other) const {
        return data_ == other.data_ && tape_ == other.tape_ && node_ == other.node_;
    }

private:
    friend class Tape;
    Tensor(Shape shape, std::shared_ptr<const std::vector<double>> data, Tape* tape, int32_t node)
        : shape_(std::move(shape)), data_(std::move(data)), tape_(tape), node_(node) {}

    Shape shape_;
    std::shared_ptr<const std::vector<double>> data_;
    Tape* tape_ = nullptr;
    int32_t node_ = -1;
};

/// Enables scanning every operation result for NaN/Inf (used by the tests).
void set_debug_checks(bool enabled);
bool debug_checks_enabled();

} // namespace softprog
