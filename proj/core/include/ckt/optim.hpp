#pragma once

#include <cstdint>
#include <vector>

#include "ckt/tensor.hpp"

namespace ckt {

struct AdamWConfig {
    double learning_rate = 6e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
};

/// AdamW with decoupled weight decay: the decay term is applied directly to
/// the parameters, never folded into the moment estimates.
class AdamW {
public:
    AdamW(std::vector<Tensor> params, AdamWConfig config = {});

    /// One update from the gradients currently stored on the parameters.
    /// Parameters without a populated grad are treated as grad 0.
    void step();

    void zero_grad();

    std::uint64_t step_count() const { return step_; }
    const AdamWConfig& config() const { return config_; }
    std::vector<Tensor>& params() { return params_; }

    /// Moment accumulators, exposed for checkpointing/tests.
    const std::vector<std::vector<double>>& first_moments() const { return m_; }
    const std::vector<std::vector<double>>& second_moments() const { return v_; }

private:
    AdamWConfig config_;
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::uint64_t step_ = 0;
};

}  // namespace ckt
