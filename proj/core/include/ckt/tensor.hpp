#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ckt {

class Rng;

namespace detail {

struct TensorNode {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    // Graph edges. backward_fn reads this node's grad and accumulates into
    // the parents'. Only populated while autograd recording is enabled.
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward_fn;

    std::size_t size() const { return values.size(); }
    void ensure_grad();
};

}  // namespace detail

/// Dense row-major tensor of doubles with optional gradient.
///
/// Tensor is a shared handle: copies alias the same storage and the same
/// node in the autodiff graph. Operations on tensors record backward
/// closures while recording is enabled (see autograd_enabled / NoGradGuard),
/// and backward() replays them in reverse topological order.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);
    static Tensor scalar(double value);  // rank-0
    /// Leaf with requires_grad set; the usual way to create a parameter.
    static Tensor param(std::vector<std::size_t> shape, std::vector<double> values);
    /// Parameter with N(0, stddev^2) entries drawn from rng.
    static Tensor randn_param(std::vector<std::size_t> shape, Rng& rng, double stddev);

    bool defined() const { return node_ != nullptr; }
    const std::vector<std::size_t>& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t size() const;
    /// Dimension i of the shape.
    std::size_t dim(std::size_t i) const;

    std::span<const double> values() const;
    std::span<double> values_mut();
    double value_at(std::size_t flat_index) const;
    /// Value of a one-element tensor.
    double item() const;

    bool requires_grad() const;
    void set_requires_grad(bool flag);
    bool has_grad() const;
    std::span<const double> grad() const;
    void zero_grad();

    /// Reverse-mode accumulation from this (scalar) tensor.
    void backward() const;

    /// Drop graph edges so the tensor is a plain value (used after loading
    /// checkpoints and when transferring between threads).
    void detach_();

    std::shared_ptr<detail::TensorNode> node() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::TensorNode> node_;

    friend Tensor make_op_result(std::vector<std::size_t> shape, std::vector<double> values,
                                 std::vector<Tensor> inputs,
                                 std::function<void(detail::TensorNode&)> backward_fn);
};

/// Whether operations currently record backward closures (thread-local).
bool autograd_enabled();
void set_autograd_enabled(bool enabled);

/// RAII scope that disables graph recording (inference mode).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

/// Create an op result, wiring parents and the backward closure when
/// recording is enabled and some input requires grad. Used by ops.cpp;
/// exposed so models can define fused ops if ever needed.
Tensor make_op_result(std::vector<std::size_t> shape, std::vector<double> values,
                      std::vector<Tensor> inputs,
                      std::function<void(detail::TensorNode&)> backward_fn);

/// Accumulate `contribution` into `target`'s grad (allocating zeros first).
void accumulate_grad(detail::TensorNode& target, std::span<const double> contribution);

std::string shape_to_string(std::span<const std::size_t> shape);

}  // namespace ckt
