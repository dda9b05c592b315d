#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gexia/errors.hpp"
#include "gexia/rng.hpp"
#include "gexia/shape.hpp"

namespace gexia {

// Dense rank-1..4 tensor, row-major. Acts both as a value and as a node in
// the dynamic gradient tape: `tape_id` points at the op record that produced
// it (-1 for leaves). Grad storage is allocated lazily during backward.
template <typename Scalar>
struct Tensor {
    Shape shape;
    std::vector<Scalar> data;
    std::vector<Scalar> grad;
    bool requires_grad = false;
    bool needs_grad = false;  // requires_grad or descends from a tracked leaf
    std::int64_t tape_id = -1;

    std::int64_t numel() const { return shape.numel(); }
    std::int64_t rows() const { return shape.rows(); }
    std::int64_t cols() const { return shape.cols(); }

    Scalar& at(std::int64_t r, std::int64_t c) { return data[static_cast<std::size_t>(r * cols() + c)]; }
    Scalar at(std::int64_t r, std::int64_t c) const { return data[static_cast<std::size_t>(r * cols() + c)]; }

    Scalar item() const {
        if (numel() != 1) throw UsageError("item() requires a single-element tensor, shape " + shape.str());
        return data[0];
    }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), Scalar(0));
    }

    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), Scalar(0));
    }

    bool all_finite() const {
        for (Scalar v : data) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }
};

template <typename Scalar>
using TensorPtr = std::shared_ptr<Tensor<Scalar>>;

template <typename Scalar>
TensorPtr<Scalar> make_tensor(Shape shape, std::vector<Scalar> data, bool requires_grad = false) {
    if (static_cast<std::int64_t>(data.size()) != shape.numel()) {
        throw DimensionError("data length " + std::to_string(data.size()) + " does not match shape " + shape.str());
    }
    auto t = std::make_shared<Tensor<Scalar>>();
    t->shape = shape;
    t->data = std::move(data);
    t->requires_grad = requires_grad;
    t->needs_grad = requires_grad;
    return t;
}

template <typename Scalar>
TensorPtr<Scalar> zeros(Shape shape, bool requires_grad = false) {
    return make_tensor<Scalar>(shape, std::vector<Scalar>(static_cast<std::size_t>(shape.numel()), Scalar(0)),
                               requires_grad);
}

template <typename Scalar>
TensorPtr<Scalar> full(Shape shape, Scalar value, bool requires_grad = false) {
    return make_tensor<Scalar>(shape, std::vector<Scalar>(static_cast<std::size_t>(shape.numel()), value),
                               requires_grad);
}

template <typename Scalar>
TensorPtr<Scalar> scalar_tensor(Scalar value, bool requires_grad = false) {
    return make_tensor<Scalar>(Shape{1}, std::vector<Scalar>{value}, requires_grad);
}

template <typename Scalar>
TensorPtr<Scalar> randn(Shape shape, Rng& rng, double stddev, bool requires_grad = false) {
    std::vector<Scalar> v(static_cast<std::size_t>(shape.numel()));
    for (auto& x : v) x = static_cast<Scalar>(rng.normal(stddev));
    return make_tensor<Scalar>(shape, std::move(v), requires_grad);
}

template <typename Scalar>
TensorPtr<Scalar> identity_matrix(std::int64_t n) {
    auto t = zeros<Scalar>(Shape{n, n});
    for (std::int64_t i = 0; i < n; ++i) t->at(i, i) = Scalar(1);
    return t;
}

// Dynamic gradient tape, re-recorded on every forward pass. Records are
// appended in execution order, so inputs always precede their consumers and
// a single reverse sweep implements backpropagation.
template <typename Scalar>
class Tape {
public:
    using Ptr = TensorPtr<Scalar>;

    struct Record {
        std::vector<Ptr> inputs;
        Ptr output;
        std::function<void()> backward;
    };

    // Registers `output` as the result of an op over `inputs`. The backward
    // closure reads output->grad and accumulates into the inputs' grads.
    void record(std::vector<Ptr> inputs, const Ptr& output, std::function<void()> backward) {
        bool needs = false;
        for (const auto& in : inputs) needs = needs || in->needs_grad;
        output->needs_grad = needs;
        output->tape_id = static_cast<std::int64_t>(records_.size());
        records_.push_back(Record{std::move(inputs), output, std::move(backward)});
    }

    std::size_t size() const { return records_.size(); }

    // Populates grads of every requires_grad leaf reachable from `loss`.
    // Grads of intermediate (non-leaf) tensors are discarded afterwards.
    void backward(const Ptr& loss) {
        if (loss->numel() != 1) throw UsageError("backward requires a scalar loss, shape " + loss->shape.str());
        if (loss->tape_id < 0 || loss->tape_id >= static_cast<std::int64_t>(records_.size()) ||
            records_[static_cast<std::size_t>(loss->tape_id)].output.get() != loss.get()) {
            throw UsageError("loss tensor was not produced under this tape");
        }
        for (auto& rec : records_) {
            rec.output->grad.clear();
            for (auto& in : rec.inputs) in->grad.clear();
        }
        loss->ensure_grad();
        loss->grad[0] = Scalar(1);
        for (std::int64_t i = loss->tape_id; i >= 0; --i) {
            auto& rec = records_[static_cast<std::size_t>(i)];
            if (rec.output->grad.empty()) continue;  // not on the path to the loss
            rec.backward();
        }
        for (auto& rec : records_) {
            if (!rec.output->requires_grad) rec.output->grad.clear();
            for (auto& in : rec.inputs) {
                if (!in->requires_grad) in->grad.clear();
            }
        }
    }

    void clear() { records_.clear(); }

private:
    std::vector<Record> records_;
};

// Accumulates `delta` into t's grad buffer, allocating it on first use.
template <typename Scalar>
inline void accumulate_grad(const TensorPtr<Scalar>& t, const Scalar* delta, std::size_t n) {
    t->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) t->grad[i] += delta[i];
}

}  // namespace gexia
