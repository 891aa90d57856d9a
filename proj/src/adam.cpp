#include "mms/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace mms {

Adam::Adam(std::vector<TensorPtr> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
    for (const auto& p : params_) {
        if (!p->requires_grad) throw std::invalid_argument("Adam: parameter without gradient");
        m_.emplace_back(p->size(), 0.0);
        v_.emplace_back(p->size(), 0.0);
    }
}

void Adam::step() {
    step({});
}

void Adam::step(const std::vector<std::vector<std::uint8_t>>& masks) {
    if (!masks.empty() && masks.size() != params_.size())
        throw std::invalid_argument("Adam: mask list does not match parameter list");
    ++step_count_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = *params_[i];
        const std::vector<std::uint8_t>* mask = nullptr;
        if (!masks.empty() && !masks[i].empty()) {
            if (masks[i].size() != static_cast<std::size_t>(p.size()))
                throw std::invalid_argument("Adam: mask size mismatch");
            mask = &masks[i];
        }
        for (int k = 0; k < p.size(); ++k) {
            if (mask && !(*mask)[k]) continue;
            double g = p.grad[k] + config_.weight_decay * p.values[k];
            m_[i][k] = config_.beta1 * m_[i][k] + (1.0 - config_.beta1) * g;
            v_[i][k] = config_.beta2 * v_[i][k] + (1.0 - config_.beta2) * g * g;
            double mhat = m_[i][k] / bc1;
            double vhat = v_[i][k] / bc2;
            p.values[k] -= config_.lr * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p->zero_grad();
}

}  // namespace mms
