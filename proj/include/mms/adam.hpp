#pragma once

#include <cstdint>
#include <vector>

#include "mms/tensor.hpp"

namespace mms {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;  // additive L2 gradient term
};

/// Adam over a fixed parameter list. step() can be restricted to a per-entry
/// mask so that parameters of non-sampled candidates stay bit-identical,
/// moments included.
class Adam {
public:
    Adam(std::vector<TensorPtr> params, AdamConfig config);

    void step();
    /// masks[i] parallels params[i]; an empty mask means all entries active.
    void step(const std::vector<std::vector<std::uint8_t>>& masks);
    void zero_grad();

    std::int64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return config_; }

private:
    std::vector<TensorPtr> params_;
    AdamConfig config_;
    std::int64_t step_count_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace mms
