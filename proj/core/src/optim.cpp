#include "ckt/optim.hpp"

#include <cmath>

#include "ckt/errors.hpp"

namespace ckt {

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig config)
    : config_(config), params_(std::move(params)) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void AdamW::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = params_[pi];
        auto values = p.values_mut();
        if (m_[pi].size() != values.size()) {
            throw DimensionError("adamw: moment/parameter size mismatch for parameter " +
                                 std::to_string(pi));
        }
        const bool has_grad = p.has_grad();
        if (has_grad && p.grad().size() != values.size()) {
            throw DimensionError("adamw: grad/parameter size mismatch for parameter " +
                                 std::to_string(pi));
        }
        auto& m = m_[pi];
        auto& v = v_[pi];
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = has_grad ? p.grad()[i] : 0.0;
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            const double update = m_hat / (std::sqrt(v_hat) + config_.epsilon);
            // decoupled decay: shrink the parameter itself, independent of g
            values[i] -= config_.learning_rate * update +
                         config_.learning_rate * config_.weight_decay * values[i];
        }
    }
}

void AdamW::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

}  // namespace ckt
