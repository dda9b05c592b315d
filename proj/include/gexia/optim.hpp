#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gexia/tensor.hpp"

namespace gexia {

// Learning-rate schedule. Cosine decays from the base lr to min_lr over
// total_steps and stays at min_lr afterwards.
struct LrSchedule {
    enum class Kind { constant, cosine };
    Kind kind = Kind::constant;
    std::int64_t total_steps = 0;
    double min_lr = 0.0;

    double at(std::int64_t step, double base_lr) const {
        if (kind == Kind::constant) return base_lr;
        if (total_steps <= 0 || step >= total_steps) return min_lr;
        const double t = static_cast<double>(step) / static_cast<double>(total_steps);
        return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(3.14159265358979323846 * t));
    }
};

// AdamW with decoupled weight decay and per-group learning rates.
template <typename S>
class AdamW {
public:
    struct Group {
        std::string name;
        std::vector<TensorPtr<S>> params;
        double base_lr = 1e-3;
        double weight_decay = 0.0;
    };

    AdamW(std::vector<Group> groups, LrSchedule schedule, double beta1 = 0.9, double beta2 = 0.999,
          double eps = 1e-8)
        : groups_(std::move(groups)), schedule_(schedule), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (auto& g : groups_) {
            for (auto& p : g.params) {
                moments_m_.push_back(std::vector<S>(p->data.size(), S(0)));
                moments_v_.push_back(std::vector<S>(p->data.size(), S(0)));
            }
        }
    }

    // Applies one update from the grads currently stored on the parameters.
    // Parameters with no grad (e.g. an untouched branch) are skipped.
    void step() {
        const std::int64_t t = step_count_ + 1;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t));
        std::size_t slot = 0;
        for (auto& g : groups_) {
            const double lr = schedule_.at(step_count_, g.base_lr);
            for (auto& p : g.params) {
                auto& m = moments_m_[slot];
                auto& v = moments_v_[slot];
                ++slot;
                if (p->grad.empty()) continue;
                if (p->grad.size() != p->data.size()) throw DimensionError("grad/param size mismatch in optimizer");
                for (std::size_t i = 0; i < p->data.size(); ++i) {
                    const double grad = static_cast<double>(p->grad[i]);
                    const double mi = beta1_ * static_cast<double>(m[i]) + (1.0 - beta1_) * grad;
                    const double vi = beta2_ * static_cast<double>(v[i]) + (1.0 - beta2_) * grad * grad;
                    m[i] = static_cast<S>(mi);
                    v[i] = static_cast<S>(vi);
                    double x = static_cast<double>(p->data[i]);
                    x -= lr * g.weight_decay * x;
                    x -= lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps_);
                    p->data[i] = static_cast<S>(x);
                }
            }
        }
        ++step_count_;
    }

    std::int64_t step_count() const { return step_count_; }
    void set_step_count(std::int64_t s) { step_count_ = s; }

    double current_lr(std::size_t group_index) const {
        return schedule_.at(step_count_, groups_[group_index].base_lr);
    }

    const std::vector<Group>& groups() const { return groups_; }

    // Moment buffers in group-then-parameter order, for checkpointing.
    std::vector<S>& moment_m(std::size_t i) { return moments_m_[i]; }
    std::vector<S>& moment_v(std::size_t i) { return moments_v_[i]; }
    std::size_t slot_count() const { return moments_m_.size(); }

private:
    std::vector<Group> groups_;
    LrSchedule schedule_;
    double beta1_, beta2_, eps_;
    std::int64_t step_count_ = 0;
    std::vector<std::vector<S>> moments_m_;
    std::vector<std::vector<S>> moments_v_;
};

}  // namespace gexia
