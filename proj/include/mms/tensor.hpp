#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mms/graph.hpp"
#include "mms/matrix.hpp"

namespace mms {

/// Dense 2-D tensor with an accumulated gradient of the same shape.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;

    int size() const { return rows * cols; }
    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    double scalar() const { return values[0]; }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

    static std::shared_ptr<Tensor> zeros(int rows, int cols, bool requires_grad = false);
    static std::shared_ptr<Tensor> from(const Matrix& m, bool requires_grad = false);
    Matrix to_matrix() const;
};

using TensorPtr = std::shared_ptr<Tensor>;

enum class Axis { Rows, Cols };

/// Define-by-run gradient tape. Each op records a backward closure; the tape
/// is rebuilt every iteration, so there is no graph caching or reuse.
/// A tape and its tensors belong to a single search run.
class Tape {
public:
    // out = a * b
    TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
    // out[i] = mean of h rows over in-neighbors of i; empty rows stay zero.
    TensorPtr sparse_aggregate(const TypedAdjacency& adj, const TensorPtr& h);
    TensorPtr relu(const TensorPtr& x);
    TensorPtr add(const TensorPtr& a, const TensorPtr& b);
    TensorPtr scale(const TensorPtr& x, double c);
    // out = x * (factor * s[idx]); the scalar keeps its gradient path.
    TensorPtr scale_by_entry(const TensorPtr& x, const TensorPtr& s, int idx, double factor = 1.0);
    // Max-subtracted softmax along the given axis.
    TensorPtr softmax(const TensorPtr& x, Axis axis);
    TensorPtr slice_rows(const TensorPtr& x, int begin, int count);
    // Vertical stack of equal-width blocks.
    TensorPtr concat_rows(const std::vector<TensorPtr>& parts);
    // Adds a 1 x cols bias row to every row of x.
    TensorPtr add_row_bias(const TensorPtr& x, const TensorPtr& bias);
    // out[k] = dot(x[u_k], x[v_k]) for each pair.
    TensorPtr pairwise_dot(const TensorPtr& x, const std::vector<std::pair<int, int>>& pairs);
    // Mean cross-entropy over the listed rows, log-sum-exp formulation.
    TensorPtr cross_entropy(const TensorPtr& logits, const std::vector<int>& labels,
                            const std::vector<int>& rows);
    // Mean binary cross-entropy with logits.
    TensorPtr binary_cross_entropy(const TensorPtr& scores, const std::vector<double>& targets);

    /// Seeds d(loss)/d(loss) = 1 and replays recorded closures in reverse.
    void backward(const TensorPtr& loss);

    void clear();
    std::size_t num_ops() const { return steps_.size(); }

private:
    TensorPtr make(int rows, int cols);
    void record(std::function<void()> fn) { steps_.push_back(std::move(fn)); }

    std::vector<std::function<void()>> steps_;
    std::vector<TensorPtr> retained_;
};

}  // namespace mms
