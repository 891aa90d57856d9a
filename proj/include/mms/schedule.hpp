#pragma once

#include <vector>

namespace mms {

enum class Growth { Linear, Warmup, Quadratic, Step };

/// Epoch-indexed growth of the activation control value. All policies are
/// nondecreasing in e, start at 0, and reach lambda_final at e = E.
struct ThresholdSchedule {
    Growth growth = Growth::Linear;
    double lambda_final = 1.0;
    int warmup_epochs = 5;  // only for Growth::Warmup

    double lambda_at(int epoch, int total_epochs) const;
};

/// tau = lambda_eff * p_max + (1 - lambda_eff) * p_min.
double strength_threshold(const std::vector<double>& strengths, double lambda_eff);

/// Candidates with strength >= tau(lambda_eff). At lambda_eff == 1 exactly
/// one survives: the lowest-index maximum.
std::vector<int> activated_paths(const std::vector<double>& strengths, double lambda_eff);

int argmax_lowest(const std::vector<double>& strengths);

}  // namespace mms
