#include "ckt/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "ckt/errors.hpp"
#include "ckt/rng.hpp"

namespace ckt {

namespace {

thread_local bool g_autograd_enabled = true;

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

}  // namespace

namespace detail {

void TensorNode::ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
}

}  // namespace detail

bool autograd_enabled() { return g_autograd_enabled; }
void set_autograd_enabled(bool enabled) { g_autograd_enabled = enabled; }

NoGradGuard::NoGradGuard() : previous_(g_autograd_enabled) { g_autograd_enabled = false; }
NoGradGuard::~NoGradGuard() { g_autograd_enabled = previous_; }

std::string shape_to_string(std::span<const std::size_t> shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values) {
    if (shape_product(shape) != values.size()) {
        throw DimensionError("tensor: shape " + shape_to_string(shape) + " does not match " +
                             std::to_string(values.size()) + " values");
    }
    node_ = std::make_shared<detail::TensorNode>();
    node_->shape = std::move(shape);
    node_->values = std::move(values);
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    const std::size_t n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    const std::size_t n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::param(std::vector<std::size_t> shape, std::vector<double> values) {
    Tensor t(std::move(shape), std::move(values));
    t.set_requires_grad(true);
    return t;
}

Tensor Tensor::randn_param(std::vector<std::size_t> shape, Rng& rng, double stddev) {
    const std::size_t n = shape_product(shape);
    return param(std::move(shape), rng.normal_vector(n, 0.0, stddev));
}

const std::vector<std::size_t>& Tensor::shape() const {
    if (!node_) throw ContractError("tensor: undefined handle");
    return node_->shape;
}

std::size_t Tensor::size() const {
    if (!node_) throw ContractError("tensor: undefined handle");
    return node_->values.size();
}

std::size_t Tensor::dim(std::size_t i) const {
    const auto& s = shape();
    if (i >= s.size()) throw DimensionError("tensor: dim index out of rank");
    return s[i];
}

std::span<const double> Tensor::values() const {
    if (!node_) throw ContractError("tensor: undefined handle");
    return node_->values;
}

std::span<double> Tensor::values_mut() {
    if (!node_) throw ContractError("tensor: undefined handle");
    return node_->values;
}

double Tensor::value_at(std::size_t flat_index) const {
    if (flat_index >= size()) throw IndexError("tensor: flat index out of range");
    return node_->values[flat_index];
}

double Tensor::item() const {
    if (size() != 1) {
        throw ContractError("tensor: item() on non-scalar of shape " +
                            shape_to_string(shape()));
    }
    return node_->values[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
    if (!node_) throw ContractError("tensor: undefined handle");
    node_->requires_grad = flag;
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
    if (!node_ || node_->grad.empty()) {
        throw ContractError("tensor: grad accessed before backward populated it");
    }
    return node_->grad;
}

void Tensor::zero_grad() {
    if (!node_) return;
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::detach_() {
    if (!node_) return;
    node_->parents.clear();
    node_->backward_fn = nullptr;
}

void Tensor::backward() const {
    if (!node_) throw ContractError("backward: undefined tensor");
    if (size() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " +
                            shape_to_string(shape()));
    }
    // Iterative DFS for reverse topological order; parent order is fixed at
    // op creation, so the walk (and hence accumulation order) is
    // deterministic for a given graph.
    std::vector<detail::TensorNode*> order;
    std::unordered_set<detail::TensorNode*> visited;
    struct Frame {
        detail::TensorNode* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({node_.get(), 0});
    visited.insert(node_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            detail::TensorNode* p = f.node->parents[f.next_parent].get();
            ++f.next_parent;
            if (visited.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    // order is now topological (parents before children); walk it backwards.
    node_->ensure_grad();
    node_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::TensorNode* n = *it;
        if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
}

Tensor make_op_result(std::vector<std::size_t> shape, std::vector<double> values,
                      std::vector<Tensor> inputs,
                      std::function<void(detail::TensorNode&)> backward_fn) {
    Tensor out(std::move(shape), std::move(values));
    bool needs_grad = false;
    if (g_autograd_enabled) {
        for (const auto& in : inputs) {
            if (in.defined() && in.requires_grad()) {
                needs_grad = true;
                break;
            }
        }
    }
    if (needs_grad) {
        auto node = out.node();
        node->requires_grad = true;
        node->parents.reserve(inputs.size());
        for (auto& in : inputs) node->parents.push_back(in.node());
        node->backward_fn = std::move(backward_fn);
    }
    return out;
}

void accumulate_grad(detail::TensorNode& target, std::span<const double> contribution) {
    if (!target.requires_grad) return;
    target.ensure_grad();
    if (contribution.size() != target.grad.size()) {
        throw DimensionError("grad accumulation size mismatch");
    }
    for (std::size_t i = 0; i < contribution.size(); ++i) target.grad[i] += contribution[i];
}

}  // namespace ckt
