#pragma once

#include <cassert>
#include <vector>

namespace mms {

/// Dense row-major matrix of doubles. Plain storage for graph features and
/// non-differentiable math; the training engine has its own Tensor type.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return values[static_cast<std::size_t>(r) * cols + c];
    }
    double at(int r, int c) const {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return values[static_cast<std::size_t>(r) * cols + c];
    }
    const double* row(int r) const { return values.data() + static_cast<std::size_t>(r) * cols; }
    double* row(int r) { return values.data() + static_cast<std::size_t>(r) * cols; }
};

}  // namespace mms
