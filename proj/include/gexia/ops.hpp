#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gexia/tensor.hpp"

namespace gexia::ops {

template <typename S>
using EMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MatMap = Eigen::Map<EMat<S>>;
template <typename S>
using ConstMatMap = Eigen::Map<const EMat<S>>;

template <typename S>
MatMap<S> as_matrix(Tensor<S>& t) {
    return MatMap<S>(t.data.data(), t.rows(), t.cols());
}

template <typename S>
ConstMatMap<S> as_matrix(const Tensor<S>& t) {
    return ConstMatMap<S>(t.data.data(), t.rows(), t.cols());
}

template <typename S>
MatMap<S> grad_matrix(Tensor<S>& t) {
    t.ensure_grad();
    return MatMap<S>(t.grad.data(), t.rows(), t.cols());
}

namespace detail {
inline void require_rank2(const Shape& s, const char* op) {
    if (s.rank() != 2) throw DimensionError(std::string(op) + " requires a rank-2 tensor, got " + s.str());
}
}  // namespace detail

// --- elementwise ---

template <typename S>
TensorPtr<S> add(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
    if (a->shape != b->shape) throw DimensionError("add shape mismatch " + a->shape.str() + " vs " + b->shape.str());
    auto y = zeros<S>(a->shape);
    for (std::size_t i = 0; i < y->data.size(); ++i) y->data[i] = a->data[i] + b->data[i];
    tape.record({a, b}, y, [a, b, y]() {
        if (a->needs_grad) accumulate_grad(a, y->grad.data(), y->grad.size());
        if (b->needs_grad) accumulate_grad(b, y->grad.data(), y->grad.size());
    });
    return y;
}

template <typename S>
TensorPtr<S> mul(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
    if (a->shape != b->shape) throw DimensionError("mul shape mismatch " + a->shape.str() + " vs " + b->shape.str());
    auto y = zeros<S>(a->shape);
    for (std::size_t i = 0; i < y->data.size(); ++i) y->data[i] = a->data[i] * b->data[i];
    tape.record({a, b}, y, [a, b, y]() {
        if (a->needs_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < y->grad.size(); ++i) a->grad[i] += y->grad[i] * b->data[i];
        }
        if (b->needs_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < y->grad.size(); ++i) b->grad[i] += y->grad[i] * a->data[i];
        }
    });
    return y;
}

template <typename S>
TensorPtr<S> scale(Tape<S>& tape, const TensorPtr<S>& a, double c) {
    auto y = zeros<S>(a->shape);
    const S cs = static_cast<S>(c);
    for (std::size_t i = 0; i < y->data.size(); ++i) y->data[i] = cs * a->data[i];
    tape.record({a}, y, [a, y, cs]() {
        if (!a->needs_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < y->grad.size(); ++i) a->grad[i] += cs * y->grad[i];
    });
    return y;
}

template <typename S>
TensorPtr<S> exp(Tape<S>& tape, const TensorPtr<S>& a) {
    auto y = zeros<S>(a->shape);
    for (std::size_t i = 0; i < y->data.size(); ++i) y->data[i] = std::exp(a->data[i]);
    tape.record({a}, y, [a, y]() {
        if (!a->needs_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < y->grad.size(); ++i) a->grad[i] += y->grad[i] * y->data[i];
    });
    return y;
}

// Broadcast-multiply by a single-element tensor.
template <typename S>
TensorPtr<S> scale_by(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& s) {
    if (s->numel() != 1) throw DimensionError("scale_by expects a single-element scale tensor");
    auto y = zeros<S>(a->shape);
    const S sv = s->data[0];
    for (std::size_t i = 0; i < y->data.size(); ++i) y->data[i] = sv * a->data[i];
    tape.record({a, s}, y, [a, s, y, sv]() {
        if (a->needs_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < y->grad.size(); ++i) a->grad[i] += sv * y->grad[i];
        }
        if (s->needs_grad) {
            s->ensure_grad();
            S acc = S(0);
            for (std::size_t i = 0; i < y->grad.size(); ++i) acc += y->grad[i] * a->data[i];
            s->grad[0] += acc;
        }
    });
    return y;
}

// --- matrix ops ---

template <typename S>
TensorPtr<S> matmul(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
    detail::require_rank2(a->shape, "matmul");
    detail::require_rank2(b->shape, "matmul");
    if (a->cols() != b->rows()) {
        throw DimensionError("matmul inner dims differ: " + a->shape.str() + " * " + b->shape.str());
    }
    auto y = zeros<S>(Shape{a->rows(), b->cols()});
    as_matrix(*y).noalias() = as_matrix(*a) * as_matrix(*b);
    tape.record({a, b}, y, [a, b, y]() {
        MatMap<S> g(y->grad.data(), y->rows(), y->cols());
        if (a->needs_grad) grad_matrix(*a).noalias() += g * as_matrix(*b).transpose();
        if (b->needs_grad) grad_matrix(*b).noalias() += as_matrix(*a).transpose() * g;
    });
    return y;
}

template <typename S>
TensorPtr<S> transpose(Tape<S>& tape, const TensorPtr<S>& a) {
    detail::require_rank2(a->shape, "transpose");
    auto y = zeros<S>(Shape{a->cols(), a->rows()});
    as_matrix(*y) = as_matrix(*a).transpose();
    tape.record({a}, y, [a, y]() {
        if (!a->needs_grad) return;
        MatMap<S> g(y->grad.data(), y->rows(), y->cols());
        grad_matrix(*a) += g.transpose();
    });
    return y;
}

template <typename S>
TensorPtr<S> reshape(Tape<S>& tape, const TensorPtr<S>& a, Shape shape) {
    if (shape.numel() != a->numel()) {
        throw DimensionError("reshape numel mismatch: " + a->shape.str() + " -> " + shape.str());
    }
    auto y = make_tensor<S>(shape, a->data);
    tape.record({a}, y, [a, y]() {
        if (!a->needs_grad) return;
        accumulate_grad(a, y->grad.data(), y->grad.size());
    });
    return y;
}

// y[i,:] = x[i,:] + b
template <typename S>
TensorPtr<S> add_row_bias(Tape<S>& tape, const TensorPtr<S>& x, const TensorPtr<S>& b) {
    detail::require_rank2(x->shape, "add_row_bias");
    if (b->shape.rank() != 1 || b->numel() != x->cols()) {
        throw DimensionError("add_row_bias: bias " + b->shape.str() + " vs matrix " + x->shape.str());
    }
    auto y = zeros<S>(x->shape);
    const std::int64_t m = x->rows(), n = x->cols();
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) y->at(i, j) = x->at(i, j) + b->data[static_cast<std::size_t>(j)];
    tape.record({x, b}, y, [x, b, y, m, n]() {
        if (x->needs_grad) accumulate_grad(x, y->grad.data(), y->grad.size());
        if (b->needs_grad) {
            b->ensure_grad();
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t j = 0; j < n; ++j) b->grad[static_cast<std::size_t>(j)] += y->grad[static_cast<std::size_t>(i * n + j)];
        }
    });
    return y;
}

// y[i,:] = s[i] * x[i,:]
template <typename S>
TensorPtr<S> scale_rows(Tape<S>& tape, const TensorPtr<S>& x, const TensorPtr<S>& s) {
    detail::require_rank2(x->shape, "scale_rows");
    if (s->shape.rank() != 1 || s->numel() != x->rows()) {
        throw DimensionError("scale_rows: scales " + s->shape.str() + " vs matrix " + x->shape.str());
    }
    auto y = zeros<S>(x->shape);
    const std::int64_t m = x->rows(), n = x->cols();
    for (std::int64_t i = 0; i < m; ++i) {
        const S si = s->data[static_cast<std::size_t>(i)];
        for (std::int64_t j = 0; j < n; ++j) y->at(i, j) = si * x->at(i, j);
    }
    tape.record({x, s}, y, [x, s, y, m, n]() {
        if (x->needs_grad) {
            x->ensure_grad();
            for (std::int64_t i = 0; i < m; ++i) {
                const S si = s->data[static_cast<std::size_t>(i)];
                for (std::int64_t j = 0; j < n; ++j)
                    x->grad[static_cast<std::size_t>(i * n + j)] += si * y->grad[static_cast<std::size_t>(i * n + j)];
            }
        }
        if (s->needs_grad) {
            s->ensure_grad();
            for (std::int64_t i = 0; i < m; ++i) {
                S acc = S(0);
                for (std::int64_t j = 0; j < n; ++j)
                    acc += y->grad[static_cast<std::size_t>(i * n + j)] * x->data[static_cast<std::size_t>(i * n + j)];
                s->grad[static_cast<std::size_t>(i)] += acc;
            }
        }
    });
    return y;
}

// Row-wise softmax with row-max subtraction.
template <typename S>
TensorPtr<S> softmax_rows(Tape<S>& tape, const TensorPtr<S>& x) {
    detail::require_rank2(x->shape, "softmax_rows");
    auto y = zeros<S>(x->shape);
    const std::int64_t m = x->rows(), n = x->cols();
    for (std::int64_t i = 0; i < m; ++i) {
        S mx = x->at(i, 0);
        for (std::int64_t j = 1; j < n; ++j) mx = std::max(mx, x->at(i, j));
        S sum = S(0);
        for (std::int64_t j = 0; j < n; ++j) {
            const S e = std::exp(x->at(i, j) - mx);
            y->at(i, j) = e;
            sum += e;
        }
        for (std::int64_t j = 0; j < n; ++j) y->at(i, j) /= sum;
    }
    tape.record({x}, y, [x, y, m, n]() {
        if (!x->needs_grad) return;
        x->ensure_grad();
        for (std::int64_t i = 0; i < m; ++i) {
            S dot = S(0);
            for (std::int64_t j = 0; j < n; ++j)
                dot += y->grad[static_cast<std::size_t>(i * n + j)] * y->data[static_cast<std::size_t>(i * n + j)];
            for (std::int64_t j = 0; j < n; ++j) {
                const std::size_t k = static_cast<std::size_t>(i * n + j);
                x->grad[k] += (y->grad[k] - dot) * y->data[k];
            }
        }
    });
    return y;
}

// Row-wise layer normalization with affine transform.
template <typename S>
TensorPtr<S> layernorm(Tape<S>& tape, const TensorPtr<S>& x, const TensorPtr<S>& gain, const TensorPtr<S>& bias,
                       double eps = 1e-5) {
    detail::require_rank2(x->shape, "layernorm");
    if (eps <= 0) throw UsageError("layernorm eps must be positive");
    const std::int64_t m = x->rows(), n = x->cols();
    if (gain->numel() != n || bias->numel() != n) {
        throw DimensionError("layernorm gain/bias must have length " + std::to_string(n));
    }
    auto y = zeros<S>(x->shape);
    auto xhat = std::make_shared<std::vector<S>>(static_cast<std::size_t>(m * n));
    auto inv_std = std::make_shared<std::vector<S>>(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) {
        S mean = S(0);
        for (std::int64_t j = 0; j < n; ++j) mean += x->at(i, j);
        mean /= static_cast<S>(n);
        S var = S(0);
        for (std::int64_t j = 0; j < n; ++j) {
            const S d = x->at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<S>(n);
        const S istd = S(1) / std::sqrt(var + static_cast<S>(eps));
        (*inv_std)[static_cast<std::size_t>(i)] = istd;
        for (std::int64_t j = 0; j < n; ++j) {
            const S h = (x->at(i, j) - mean) * istd;
            (*xhat)[static_cast<std::size_t>(i * n + j)] = h;
            y->at(i, j) = gain->data[static_cast<std::size_t>(j)] * h + bias->data[static_cast<std::size_t>(j)];
        }
    }
    tape.record({x, gain, bias}, y, [x, gain, bias, y, xhat, inv_std, m, n]() {
        if (gain->needs_grad) gain->ensure_grad();
        if (bias->needs_grad) bias->ensure_grad();
        if (x->needs_grad) x->ensure_grad();
        for (std::int64_t i = 0; i < m; ++i) {
            const S istd = (*inv_std)[static_cast<std::size_t>(i)];
            S sum_dh = S(0), sum_dh_h = S(0);
            for (std::int64_t j = 0; j < n; ++j) {
                const std::size_t k = static_cast<std::size_t>(i * n + j);
                const S g = y->grad[k];
                const S h = (*xhat)[k];
                if (gain->needs_grad) gain->grad[static_cast<std::size_t>(j)] += g * h;
                if (bias->needs_grad) bias->grad[static_cast<std::size_t>(j)] += g;
                const S dh = g * gain->data[static_cast<std::size_t>(j)];
                sum_dh += dh;
                sum_dh_h += dh * h;
            }
            if (x->needs_grad) {
                for (std::int64_t j = 0; j < n; ++j) {
                    const std::size_t k = static_cast<std::size_t>(i * n + j);
                    const S dh = y->grad[k] * gain->data[static_cast<std::size_t>(j)];
                    const S h = (*xhat)[k];
                    x->grad[k] += istd * (dh - (sum_dh + h * sum_dh_h) / static_cast<S>(n));
                }
            }
        }
    });
    return y;
}

// y[i,:] = table[ids[i],:]; backward scatter-adds into the table.
template <typename S>
TensorPtr<S> gather_rows(Tape<S>& tape, const TensorPtr<S>& table, const std::vector<std::int64_t>& ids) {
    detail::require_rank2(table->shape, "gather_rows");
    if (ids.empty()) throw DimensionError("gather_rows needs at least one index");
    const std::int64_t v = table->rows(), n = table->cols();
    for (std::int64_t id : ids) {
        if (id < 0 || id >= v) throw DataError("gather_rows index " + std::to_string(id) + " out of range [0," + std::to_string(v) + ")");
    }
    auto y = zeros<S>(Shape{static_cast<std::int64_t>(ids.size()), n});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const S* src = table->data.data() + ids[i] * n;
        std::copy(src, src + n, y->data.data() + static_cast<std::int64_t>(i) * n);
    }
    auto ids_copy = std::make_shared<std::vector<std::int64_t>>(ids);
    tape.record({table}, y, [table, y, ids_copy, n]() {
        if (!table->needs_grad) return;
        table->ensure_grad();
        for (std::size_t i = 0; i < ids_copy->size(); ++i) {
            S* dst = table->grad.data() + (*ids_copy)[i] * n;
            const S* src = y->grad.data() + static_cast<std::int64_t>(i) * n;
            for (std::int64_t j = 0; j < n; ++j) dst[j] += src[j];
        }
    });
    return y;
}

template <typename S>
TensorPtr<S> concat_rows(Tape<S>& tape, const std::vector<TensorPtr<S>>& parts) {
    if (parts.empty()) throw DimensionError("concat_rows needs at least one part");
    const std::int64_t n = parts[0]->cols();
    std::int64_t m = 0;
    for (const auto& p : parts) {
        detail::require_rank2(p->shape, "concat_rows");
        if (p->cols() != n) throw DimensionError("concat_rows column mismatch");
        m += p->rows();
    }
    auto y = zeros<S>(Shape{m, n});
    std::int64_t r = 0;
    for (const auto& p : parts) {
        std::copy(p->data.begin(), p->data.end(), y->data.begin() + r * n);
        r += p->rows();
    }
    tape.record({parts.begin(), parts.end()}, y, [parts, y, n]() {
        std::int64_t r = 0;
        for (const auto& p : parts) {
            if (p->needs_grad) {
                p->ensure_grad();
                for (std::int64_t i = 0; i < p->rows() * n; ++i) p->grad[static_cast<std::size_t>(i)] += y->grad[static_cast<std::size_t>(r * n + i)];
            }
            r += p->rows();
        }
    });
    return y;
}

template <typename S>
TensorPtr<S> slice_cols(Tape<S>& tape, const TensorPtr<S>& x, std::int64_t c0, std::int64_t c1) {
    detail::require_rank2(x->shape, "slice_cols");
    if (c0 < 0 || c1 <= c0 || c1 > x->cols()) throw DimensionError("slice_cols bad range");
    const std::int64_t m = x->rows(), n = x->cols(), w = c1 - c0;
    auto y = zeros<S>(Shape{m, w});
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < w; ++j) y->at(i, j) = x->at(i, c0 + j);
    tape.record({x}, y, [x, y, c0, m, n, w]() {
        if (!x->needs_grad) return;
        x->ensure_grad();
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < w; ++j)
                x->grad[static_cast<std::size_t>(i * n + c0 + j)] += y->grad[static_cast<std::size_t>(i * w + j)];
    });
    return y;
}

template <typename S>
TensorPtr<S> concat_cols(Tape<S>& tape, const std::vector<TensorPtr<S>>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols needs at least one part");
    const std::int64_t m = parts[0]->rows();
    std::int64_t n = 0;
    for (const auto& p : parts) {
        detail::require_rank2(p->shape, "concat_cols");
        if (p->rows() != m) throw DimensionError("concat_cols row mismatch");
        n += p->cols();
    }
    auto y = zeros<S>(Shape{m, n});
    std::int64_t c = 0;
    for (const auto& p : parts) {
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < p->cols(); ++j) y->at(i, c + j) = p->at(i, j);
        c += p->cols();
    }
    tape.record({parts.begin(), parts.end()}, y, [parts, y, m, n]() {
        std::int64_t c = 0;
        for (const auto& p : parts) {
            if (p->needs_grad) {
                p->ensure_grad();
                for (std::int64_t i = 0; i < m; ++i)
                    for (std::int64_t j = 0; j < p->cols(); ++j)
                        p->grad[static_cast<std::size_t>(i * p->cols() + j)] += y->grad[static_cast<std::size_t>(i * n + c + j)];
            }
            c += p->cols();
        }
    });
    return y;
}

// Column means: y[j] = mean_i x[i,j].
template <typename S>
TensorPtr<S> mean_rows(Tape<S>& tape, const TensorPtr<S>& x) {
    detail::require_rank2(x->shape, "mean_rows");
    const std::int64_t m = x->rows(), n = x->cols();
    auto y = zeros<S>(Shape{n});
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) y->data[static_cast<std::size_t>(j)] += x->at(i, j);
    for (std::int64_t j = 0; j < n; ++j) y->data[static_cast<std::size_t>(j)] /= static_cast<S>(m);
    tape.record({x}, y, [x, y, m, n]() {
        if (!x->needs_grad) return;
        x->ensure_grad();
        const S inv = S(1) / static_cast<S>(m);
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < n; ++j)
                x->grad[static_cast<std::size_t>(i * n + j)] += inv * y->grad[static_cast<std::size_t>(j)];
    });
    return y;
}

template <typename S>
TensorPtr<S> sum_all(Tape<S>& tape, const TensorPtr<S>& x) {
    auto y = zeros<S>(Shape{1});
    S acc = S(0);
    for (S v : x->data) acc += v;
    y->data[0] = acc;
    tape.record({x}, y, [x, y]() {
        if (!x->needs_grad) return;
        x->ensure_grad();
        for (auto& g : x->grad) g += y->grad[0];
    });
    return y;
}

// Rows scaled to unit L2 norm. Zero-norm rows are a degenerate input.
template <typename S>
TensorPtr<S> l2_normalize_rows(Tape<S>& tape, const TensorPtr<S>& x) {
    detail::require_rank2(x->shape, "l2_normalize_rows");
    const std::int64_t m = x->rows(), n = x->cols();
    auto y = zeros<S>(x->shape);
    auto inv_norm = std::make_shared<std::vector<S>>(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) {
        S sq = S(0);
        for (std::int64_t j = 0; j < n; ++j) sq += x->at(i, j) * x->at(i, j);
        const S norm = std::sqrt(sq);
        if (!(norm > S(0))) throw DegenerateInputError("l2_normalize_rows: zero-norm row " + std::to_string(i));
        (*inv_norm)[static_cast<std::size_t>(i)] = S(1) / norm;
        for (std::int64_t j = 0; j < n; ++j) y->at(i, j) = x->at(i, j) / norm;
    }
    tape.record({x}, y, [x, y, inv_norm, m, n]() {
        if (!x->needs_grad) return;
        x->ensure_grad();
        for (std::int64_t i = 0; i < m; ++i) {
            S dot = S(0);
            for (std::int64_t j = 0; j < n; ++j)
                dot += y->grad[static_cast<std::size_t>(i * n + j)] * y->data[static_cast<std::size_t>(i * n + j)];
            const S inv = (*inv_norm)[static_cast<std::size_t>(i)];
            for (std::int64_t j = 0; j < n; ++j) {
                const std::size_t k = static_cast<std::size_t>(i * n + j);
                x->grad[k] += inv * (y->grad[k] - dot * y->data[k]);
            }
        }
    });
    return y;
}

// Mean over rows of (logsumexp(row) - row[label]).
template <typename S>
TensorPtr<S> cross_entropy_rows(Tape<S>& tape, const TensorPtr<S>& logits, const std::vector<std::int64_t>& labels) {
    detail::require_rank2(logits->shape, "cross_entropy_rows");
    const std::int64_t m = logits->rows(), n = logits->cols();
    if (static_cast<std::int64_t>(labels.size()) != m) throw DimensionError("cross_entropy_rows: one label per row required");
    for (std::int64_t l : labels) {
        if (l < 0 || l >= n) throw DataError("cross_entropy_rows: label out of range");
    }
    auto y = zeros<S>(Shape{1});
    auto probs = std::make_shared<std::vector<S>>(static_cast<std::size_t>(m * n));
    S total = S(0);
    for (std::int64_t i = 0; i < m; ++i) {
        S mx = logits->at(i, 0);
        for (std::int64_t j = 1; j < n; ++j) mx = std::max(mx, logits->at(i, j));
        S sum = S(0);
        for (std::int64_t j = 0; j < n; ++j) {
            const S e = std::exp(logits->at(i, j) - mx);
            (*probs)[static_cast<std::size_t>(i * n + j)] = e;
            sum += e;
        }
        for (std::int64_t j = 0; j < n; ++j) (*probs)[static_cast<std::size_t>(i * n + j)] /= sum;
        total += std::log(sum) + mx - logits->at(i, labels[static_cast<std::size_t>(i)]);
    }
    y->data[0] = total / static_cast<S>(m);
    auto labels_copy = std::make_shared<std::vector<std::int64_t>>(labels);
    tape.record({logits}, y, [logits, y, probs, labels_copy, m, n]() {
        if (!logits->needs_grad) return;
        logits->ensure_grad();
        const S g = y->grad[0] / static_cast<S>(m);
        for (std::int64_t i = 0; i < m; ++i) {
            for (std::int64_t j = 0; j < n; ++j) {
                S p = (*probs)[static_cast<std::size_t>(i * n + j)];
                if (j == (*labels_copy)[static_cast<std::size_t>(i)]) p -= S(1);
                logits->grad[static_cast<std::size_t>(i * n + j)] += g * p;
            }
        }
    });
    return y;
}

// Plain (non-tape) cosine similarity of two rank-1 tensors.
template <typename S>
double cosine_sim(const Tensor<S>& u, const Tensor<S>& v) {
    if (u.shape.rank() != 1 || v.shape.rank() != 1 || u.numel() != v.numel()) {
        throw DimensionError("cosine_sim requires two rank-1 tensors of equal length");
    }
    double dot = 0, nu = 0, nv = 0;
    for (std::int64_t i = 0; i < u.numel(); ++i) {
        const double a = static_cast<double>(u.data[static_cast<std::size_t>(i)]);
        const double b = static_cast<double>(v.data[static_cast<std::size_t>(i)]);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if (nu <= 0 || nv <= 0) throw DegenerateInputError("cosine_sim: zero-norm input");
    double s = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::max(-1.0, std::min(1.0, s));
}

}  // namespace gexia::ops
