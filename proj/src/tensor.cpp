#include "adamixup/tensor.hpp"

#include <sstream>

namespace adamixup {

namespace {
thread_local Graph g_tape;
thread_local bool g_grad_enabled = true;
} // namespace

int64_t Tensor::extent_product(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t e : shape) {
        if (e <= 0) throw ShapeError("tensor extents must be positive");
        n *= e;
    }
    return n;
}

TensorPtr Tensor::create(std::vector<int64_t> shape, std::vector<double> values,
                         bool requires_grad) {
    auto t = std::make_shared<Tensor>();
    int64_t n = extent_product(shape);
    if (n != static_cast<int64_t>(values.size())) {
        std::ostringstream os;
        os << "tensor value count " << values.size() << " does not match shape product " << n;
        throw ShapeError(os.str());
    }
    t->shape = std::move(shape);
    t->values = std::move(values);
    t->requires_grad = requires_grad && g_grad_enabled;
    return t;
}

TensorPtr Tensor::zeros(std::vector<int64_t> shape, bool requires_grad) {
    int64_t n = extent_product(shape);
    return create(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0),
                  requires_grad);
}

TensorPtr Tensor::scalar(double v, bool requires_grad) {
    return create({1}, {v}, requires_grad);
}

TensorPtr Tensor::vector(std::vector<double> values, bool requires_grad) {
    int64_t n = static_cast<int64_t>(values.size());
    return create({n}, std::move(values), requires_grad);
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

void Tensor::ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
}

void Tensor::accumulate_grad(const std::vector<double>& g) {
    if (g.size() != values.size()) throw ShapeError("gradient size mismatch");
    ensure_grad();
    for (size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
}

Graph& Graph::tape() { return g_tape; }

void Graph::backward(const TensorPtr& loss) {
    if (loss->size() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " + loss->shape_str());
    }
    if (nodes_.empty()) {
        throw ContractError("backward: no recorded operations (constant loss or empty graph)");
    }
    loss->ensure_grad();
    loss->grad[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    nodes_.clear();
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

void backward(const TensorPtr& loss) { Graph::tape().backward(loss); }

} // namespace adamixup
