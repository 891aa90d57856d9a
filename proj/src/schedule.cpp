#include "mms/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mms {

double ThresholdSchedule::lambda_at(int epoch, int total_epochs) const {
    if (epoch < 1 || epoch > total_epochs)
        throw std::invalid_argument("lambda_at: epoch out of range");
    if (total_epochs == 1) return 0.0;
    const double span = static_cast<double>(total_epochs - 1);
    const double frac = static_cast<double>(epoch - 1) / span;
    switch (growth) {
        case Growth::Linear:
            return lambda_final * frac;
        case Growth::Quadratic:
            return lambda_final * frac * frac;
        case Growth::Step: {
            double level = std::floor(frac * 4.0) / 4.0;
            return lambda_final * std::min(level, 1.0);
        }
        case Growth::Warmup: {
            if (epoch <= warmup_epochs) return 0.0;
            int rest = total_epochs - warmup_epochs;
            if (rest <= 1) return lambda_final;
            return lambda_final * static_cast<double>(epoch - warmup_epochs - 1) / (rest - 1);
        }
    }
    return 0.0;
}

double strength_threshold(const std::vector<double>& strengths, double lambda_eff) {
    if (strengths.empty()) throw std::invalid_argument("strength_threshold: empty strengths");
    double p_max = strengths[0], p_min = strengths[0];
    for (double p : strengths) {
        p_max = std::max(p_max, p);
        p_min = std::min(p_min, p);
    }
    return lambda_eff * p_max + (1.0 - lambda_eff) * p_min;
}

int argmax_lowest(const std::vector<double>& strengths) {
    int best = 0;
    for (std::size_t i = 1; i < strengths.size(); ++i)
        if (strengths[i] > strengths[best]) best = static_cast<int>(i);
    return best;
}

std::vector<int> activated_paths(const std::vector<double>& strengths, double lambda_eff) {
    if (strengths.empty()) throw std::invalid_argument("activated_paths: empty strengths");
    if (lambda_eff >= 1.0) return {argmax_lowest(strengths)};
    double tau = strength_threshold(strengths, lambda_eff);
    std::vector<int> active;
    for (std::size_t i = 0; i < strengths.size(); ++i)
        if (strengths[i] >= tau) active.push_back(static_cast<int>(i));
    return active;
}

}  // namespace mms
