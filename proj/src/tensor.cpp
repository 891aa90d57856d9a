#include "mms/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mms {

TensorPtr Tensor::zeros(int rows, int cols, bool requires_grad) {
    auto t = std::make_shared<Tensor>();
    t->rows = rows;
    t->cols = cols;
    t->values.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    t->grad.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    t->requires_grad = requires_grad;
    return t;
}

TensorPtr Tensor::from(const Matrix& m, bool requires_grad) {
    auto t = zeros(m.rows, m.cols, requires_grad);
    t->values = m.values;
    return t;
}

Matrix Tensor::to_matrix() const {
    Matrix m(rows, cols);
    m.values = values;
    return m;
}

TensorPtr Tape::make(int rows, int cols) {
    auto t = Tensor::zeros(rows, cols);
    retained_.push_back(t);
    return t;
}

TensorPtr Tape::matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->cols != b->rows) throw std::invalid_argument("matmul: inner dimensions disagree");
    auto out = make(a->rows, b->cols);
    const int n = a->rows, k = a->cols, m = b->cols;
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < k; ++p) {
            double av = a->at(i, p);
            if (av == 0.0) continue;
            const double* brow = &b->values[static_cast<std::size_t>(p) * m];
            double* orow = &out->values[static_cast<std::size_t>(i) * m];
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    retained_.push_back(a);
    retained_.push_back(b);
    record([a = a.get(), b = b.get(), out = out.get(), n, k, m] {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                double g = out->grad[static_cast<std::size_t>(i) * m + j];
                if (g == 0.0) continue;
                for (int p = 0; p < k; ++p) {
                    a->grad[static_cast<std::size_t>(i) * k + p] += g * b->values[static_cast<std::size_t>(p) * m + j];
                    b->grad[static_cast<std::size_t>(p) * m + j] += g * a->values[static_cast<std::size_t>(i) * k + p];
                }
            }
    });
    return out;
}

TensorPtr Tape::sparse_aggregate(const TypedAdjacency& adj, const TensorPtr& h) {
    if (h->rows != adj.cols) throw std::invalid_argument("sparse_aggregate: dimension mismatch");
    auto out = make(adj.rows, h->cols);
    const int cols = h->cols;
    for (int i = 0; i < adj.rows; ++i) {
        int deg = adj.row_degree[i];
        if (deg == 0) continue;
        double inv = 1.0 / deg;
        double* dst = &out->values[static_cast<std::size_t>(i) * cols];
        for (int k = adj.row_ptr[i]; k < adj.row_ptr[i + 1]; ++k) {
            const double* src = &h->values[static_cast<std::size_t>(adj.col_idx[k]) * cols];
            for (int c = 0; c < cols; ++c) dst[c] += src[c];
        }
        for (int c = 0; c < cols; ++c) dst[c] *= inv;
    }
    retained_.push_back(h);
    record([&adj, h = h.get(), out = out.get(), cols] {
        for (int i = 0; i < adj.rows; ++i) {
            int deg = adj.row_degree[i];
            if (deg == 0) continue;
            double inv = 1.0 / deg;
            const double* g = &out->grad[static_cast<std::size_t>(i) * cols];
            for (int k = adj.row_ptr[i]; k < adj.row_ptr[i + 1]; ++k) {
                double* dst = &h->grad[static_cast<std::size_t>(adj.col_idx[k]) * cols];
                for (int c = 0; c < cols; ++c) dst[c] += inv * g[c];
            }
        }
    });
    return out;
}

TensorPtr Tape::relu(const TensorPtr& x) {
    auto out = make(x->rows, x->cols);
    for (int i = 0; i < x->size(); ++i) out->values[i] = x->values[i] > 0 ? x->values[i] : 0.0;
    retained_.push_back(x);
    record([x = x.get(), out = out.get()] {
        for (int i = 0; i < x->size(); ++i)
            if (x->values[i] > 0) x->grad[i] += out->grad[i];
    });
    return out;
}

TensorPtr Tape::add(const TensorPtr& a, const TensorPtr& b) {
    if (a->rows != b->rows || a->cols != b->cols)
        throw std::invalid_argument("add: shape mismatch");
    auto out = make(a->rows, a->cols);
    for (int i = 0; i < out->size(); ++i) out->values[i] = a->values[i] + b->values[i];
    retained_.push_back(a);
    retained_.push_back(b);
    record([a = a.get(), b = b.get(), out = out.get()] {
        for (int i = 0; i < out->size(); ++i) {
            a->grad[i] += out->grad[i];
            b->grad[i] += out->grad[i];
        }
    });
    return out;
}

TensorPtr Tape::scale(const TensorPtr& x, double c) {
    auto out = make(x->rows, x->cols);
    for (int i = 0; i < x->size(); ++i) out->values[i] = c * x->values[i];
    retained_.push_back(x);
    record([x = x.get(), out = out.get(), c] {
        for (int i = 0; i < x->size(); ++i) x->grad[i] += c * out->grad[i];
    });
    return out;
}

TensorPtr Tape::scale_by_entry(const TensorPtr& x, const TensorPtr& s, int idx, double factor) {
    if (idx < 0 || idx >= s->size()) throw std::invalid_argument("scale_by_entry: index out of range");
    auto out = make(x->rows, x->cols);
    double w = factor * s->values[idx];
    for (int i = 0; i < x->size(); ++i) out->values[i] = w * x->values[i];
    retained_.push_back(x);
    retained_.push_back(s);
    record([x = x.get(), s = s.get(), out = out.get(), idx, factor] {
        double w = factor * s->values[idx];
        double ds = 0.0;
        for (int i = 0; i < x->size(); ++i) {
            x->grad[i] += w * out->grad[i];
            ds += out->grad[i] * x->values[i];
        }
        s->grad[idx] += factor * ds;
    });
    return out;
}

TensorPtr Tape::softmax(const TensorPtr& x, Axis axis) {
    if (x->size() == 0) throw std::invalid_argument("softmax: empty input");
    auto out = make(x->rows, x->cols);
    auto run = [&](int outer, int inner, auto index) {
        for (int i = 0; i < outer; ++i) {
            double mx = x->values[index(i, 0)];
            for (int j = 1; j < inner; ++j) mx = std::max(mx, x->values[index(i, j)]);
            double z = 0.0;
            for (int j = 0; j < inner; ++j) {
                double e = std::exp(x->values[index(i, j)] - mx);
                out->values[index(i, j)] = e;
                z += e;
            }
            for (int j = 0; j < inner; ++j) out->values[index(i, j)] /= z;
        }
    };
    const int rows = x->rows, cols = x->cols;
    auto row_major = [cols](int i, int j) { return static_cast<std::size_t>(i) * cols + j; };
    auto col_major = [cols](int j, int i) { return static_cast<std::size_t>(i) * cols + j; };
    if (axis == Axis::Rows) run(rows, cols, row_major);
    else run(cols, rows, col_major);

    retained_.push_back(x);
    record([x = x.get(), out = out.get(), axis, rows, cols, row_major, col_major] {
        auto back = [&](int outer, int inner, auto index) {
            for (int i = 0; i < outer; ++i) {
                double dot = 0.0;
                for (int j = 0; j < inner; ++j)
                    dot += out->grad[index(i, j)] * out->values[index(i, j)];
                for (int j = 0; j < inner; ++j) {
                    double p = out->values[index(i, j)];
                    x->grad[index(i, j)] += p * (out->grad[index(i, j)] - dot);
                }
            }
        };
        if (axis == Axis::Rows) back(rows, cols, row_major);
        else back(cols, rows, col_major);
    });
    return out;
}

TensorPtr Tape::slice_rows(const TensorPtr& x, int begin, int count) {
    if (begin < 0 || count < 0 || begin + count > x->rows)
        throw std::invalid_argument("slice_rows: range out of bounds");
    auto out = make(count, x->cols);
    std::copy(x->values.begin() + static_cast<std::size_t>(begin) * x->cols,
              x->values.begin() + static_cast<std::size_t>(begin + count) * x->cols,
              out->values.begin());
    retained_.push_back(x);
    record([x = x.get(), out = out.get(), begin] {
        const std::size_t off = static_cast<std::size_t>(begin) * x->cols;
        for (int i = 0; i < out->size(); ++i) x->grad[off + i] += out->grad[i];
    });
    return out;
}

TensorPtr Tape::concat_rows(const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
    int cols = parts[0]->cols, rows = 0;
    for (const auto& p : parts) {
        if (p->cols != cols) throw std::invalid_argument("concat_rows: column mismatch");
        rows += p->rows;
    }
    auto out = make(rows, cols);
    std::size_t off = 0;
    for (const auto& p : parts) {
        std::copy(p->values.begin(), p->values.end(), out->values.begin() + off);
        off += p->values.size();
        retained_.push_back(p);
    }
    std::vector<Tensor*> raw;
    for (const auto& p : parts) raw.push_back(p.get());
    record([raw = std::move(raw), out = out.get()] {
        std::size_t off = 0;
        for (Tensor* p : raw) {
            for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] += out->grad[off + i];
            off += p->grad.size();
        }
    });
    return out;
}

TensorPtr Tape::add_row_bias(const TensorPtr& x, const TensorPtr& bias) {
    if (bias->rows != 1 || bias->cols != x->cols)
        throw std::invalid_argument("add_row_bias: bias must be 1 x cols");
    auto out = make(x->rows, x->cols);
    for (int i = 0; i < x->rows; ++i)
        for (int c = 0; c < x->cols; ++c) out->at(i, c) = x->at(i, c) + bias->values[c];
    retained_.push_back(x);
    retained_.push_back(bias);
    record([x = x.get(), bias = bias.get(), out = out.get()] {
        for (int i = 0; i < x->rows; ++i)
            for (int c = 0; c < x->cols; ++c) {
                double g = out->grad[static_cast<std::size_t>(i) * x->cols + c];
                x->grad[static_cast<std::size_t>(i) * x->cols + c] += g;
                bias->grad[c] += g;
            }
    });
    return out;
}

TensorPtr Tape::pairwise_dot(const TensorPtr& x, const std::vector<std::pair<int, int>>& pairs) {
    for (const auto& [u, v] : pairs)
        if (u < 0 || u >= x->rows || v < 0 || v >= x->rows)
            throw std::invalid_argument("pairwise_dot: pair index out of range");
    auto out = make(static_cast<int>(pairs.size()), 1);
    const int d = x->cols;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double* a = &x->values[static_cast<std::size_t>(pairs[k].first) * d];
        const double* b = &x->values[static_cast<std::size_t>(pairs[k].second) * d];
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += a[c] * b[c];
        out->values[k] = s;
    }
    retained_.push_back(x);
    record([x = x.get(), out = out.get(), pairs, d] {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            double g = out->grad[k];
            if (g == 0.0) continue;
            double* ga = &x->grad[static_cast<std::size_t>(pairs[k].first) * d];
            double* gb = &x->grad[static_cast<std::size_t>(pairs[k].second) * d];
            const double* a = &x->values[static_cast<std::size_t>(pairs[k].first) * d];
            const double* b = &x->values[static_cast<std::size_t>(pairs[k].second) * d];
            for (int c = 0; c < d; ++c) {
                ga[c] += g * b[c];
                gb[c] += g * a[c];
            }
        }
    });
    return out;
}

TensorPtr Tape::cross_entropy(const TensorPtr& logits, const std::vector<int>& labels,
                              const std::vector<int>& rows) {
    if (rows.empty()) throw std::invalid_argument("cross_entropy: empty row subset");
    const int C = logits->cols;
    for (int r : rows) {
        if (r < 0 || r >= logits->rows) throw std::invalid_argument("cross_entropy: row out of range");
        if (labels[r] < 0 || labels[r] >= C)
            throw std::invalid_argument("cross_entropy: label out of range");
    }
    auto out = make(1, 1);
    double total = 0.0;
    for (int r : rows) {
        const double* row = &logits->values[static_cast<std::size_t>(r) * C];
        double mx = row[0];
        for (int c = 1; c < C; ++c) mx = std::max(mx, row[c]);
        double z = 0.0;
        for (int c = 0; c < C; ++c) z += std::exp(row[c] - mx);
        total += mx + std::log(z) - row[labels[r]];
    }
    out->values[0] = total / rows.size();
    retained_.push_back(logits);
    record([logits = logits.get(), out = out.get(), labels, rows, C] {
        double g = out->grad[0] / rows.size();
        for (int r : rows) {
            const double* row = &logits->values[static_cast<std::size_t>(r) * C];
            double* grow = &logits->grad[static_cast<std::size_t>(r) * C];
            double mx = row[0];
            for (int c = 1; c < C; ++c) mx = std::max(mx, row[c]);
            double z = 0.0;
            for (int c = 0; c < C; ++c) z += std::exp(row[c] - mx);
            for (int c = 0; c < C; ++c) {
                double p = std::exp(row[c] - mx) / z;
                grow[c] += g * (p - (c == labels[r] ? 1.0 : 0.0));
            }
        }
    });
    return out;
}

TensorPtr Tape::binary_cross_entropy(const TensorPtr& scores, const std::vector<double>& targets) {
    if (scores->size() != static_cast<int>(targets.size()))
        throw std::invalid_argument("binary_cross_entropy: size mismatch");
    if (targets.empty()) throw std::invalid_argument("binary_cross_entropy: empty input");
    auto out = make(1, 1);
    double total = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        double s = scores->values[k];
        // max(s,0) - y*s + log(1 + exp(-|s|))
        total += std::max(s, 0.0) - targets[k] * s + std::log1p(std::exp(-std::fabs(s)));
    }
    out->values[0] = total / targets.size();
    retained_.push_back(scores);
    record([scores = scores.get(), out = out.get(), targets] {
        double g = out->grad[0] / targets.size();
        for (std::size_t k = 0; k < targets.size(); ++k) {
            double s = scores->values[k];
            double sig = 1.0 / (1.0 + std::exp(-s));
            scores->grad[k] += g * (sig - targets[k]);
        }
    });
    return out;
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    loss->grad[0] = 1.0;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

void Tape::clear() {
    steps_.clear();
    retained_.clear();
}

}  // namespace mms
