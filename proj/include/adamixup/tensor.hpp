#ifndef ADAMIXUP_TENSOR_HPP
#define ADAMIXUP_TENSOR_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "adamixup/errors.hpp"

namespace adamixup {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

/// Dense row-major float64 tensor. Immutable once produced by an op; the
/// gradient buffer is empty until backward() touches it.
class Tensor {
public:
    std::vector<int64_t> shape;
    std::vector<double> values;
    bool requires_grad = false;
    std::vector<double> grad; // empty = no gradient present
    std::string name;         // set on parameters, used by checkpoints

    static TensorPtr create(std::vector<int64_t> shape, std::vector<double> values,
                            bool requires_grad = false);
    static TensorPtr zeros(std::vector<int64_t> shape, bool requires_grad = false);
    static TensorPtr scalar(double v, bool requires_grad = false);
    static TensorPtr vector(std::vector<double> values, bool requires_grad = false);

    int64_t size() const { return static_cast<int64_t>(values.size()); }
    int64_t dim(size_t axis) const { return shape.at(axis); }
    std::string shape_str() const;

    void ensure_grad();   // allocate zero grad buffer if absent
    void zero_grad() { grad.clear(); }
    void accumulate_grad(const std::vector<double>& g);

    static int64_t extent_product(const std::vector<int64_t>& shape);
};

/// Append-only operation tape. Backward traverses nodes exactly once, in
/// reverse append order, then resets the tape.
class Graph {
public:
    // Thread-local active tape; one training step owns one tape.
    static Graph& tape();

    void record(std::function<void()> backward_fn) { nodes_.push_back(std::move(backward_fn)); }
    size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    void clear() { nodes_.clear(); }

    // Seeds d(loss)/d(loss)=1 and runs the tape in reverse; the tape is
    // consumed. Throws ContractError for non-scalar loss or an empty tape.
    void backward(const TensorPtr& loss);

private:
    std::vector<std::function<void()>> nodes_;
};

/// Disables tape recording in the enclosing scope (evaluation, data-side
/// mixing). Outputs created under the guard never require grad.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

/// Convenience wrapper for Graph::tape().backward(loss).
void backward(const TensorPtr& loss);

} // namespace adamixup

#endif
