#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "roadcast/graph.hpp"

namespace roadcast::te {

/// Scalar weighted binary cross entropy, the reference form used by tests
/// and the per-sample loss node alike.
inline double weighted_bce_scalar(double p, int y, double w0, double w1) {
    const double pc = std::min(1.0 - 1e-7, std::max(1e-7, p));
    return -(w1 * y * std::log(pc) + w0 * (1 - y) * std::log(1.0 - pc));
}

/// Adam with bias correction. State per parameter: first/second moments and
/// a shared step counter.
template <typename T>
class Adam {
public:
    Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<ParamRef<T>>& params, double lr) {
        if (slots_.size() != params.size()) {
            slots_.clear();
            slots_.resize(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) {
                slots_[i].m.reshape(params[i].value->shape());
                slots_[i].v.reshape(params[i].value->shape());
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& p = *params[i].value;
            const auto& g = *params[i].grad;
            auto& m = slots_[i].m;
            auto& v = slots_[i].v;
            for (std::int64_t j = 0; j < p.size(); ++j) {
                const double gj = static_cast<double>(g[j]);
                const double mj = beta1_ * static_cast<double>(m[j]) + (1.0 - beta1_) * gj;
                const double vj = beta2_ * static_cast<double>(v[j]) + (1.0 - beta2_) * gj * gj;
                m[j] = static_cast<T>(mj);
                v[j] = static_cast<T>(vj);
                const double mhat = mj / bc1;
                const double vhat = vj / bc2;
                p[j] = static_cast<T>(static_cast<double>(p[j]) - lr * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    std::int64_t steps() const { return t_; }

private:
    struct Slot {
        Tensor<T> m, v;
    };
    double beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::vector<Slot> slots_;
};

/// Reduce-on-plateau learning rate plus early stopping, both driven by the
/// validation loss. An epoch improves only when the loss is strictly below
/// the best seen.
class LrSchedule {
public:
    LrSchedule(double initial = 1e-4, double factor = 0.9, int patience = 5, double floor = 1e-6)
        : lr_(initial), factor_(factor), patience_(patience), floor_(floor) {}

    double lr() const { return lr_; }

    /// Call once per epoch with the validation loss.
    void observe(double val_loss) {
        if (val_loss < best_) {
            best_ = val_loss;
            stale_ = 0;
        } else {
            ++stale_;
            if (stale_ >= patience_) {
                lr_ = std::max(floor_, lr_ * factor_);
                stale_ = 0;
            }
        }
    }

private:
    double lr_, factor_;
    int patience_;
    double floor_;
    double best_ = std::numeric_limits<double>::infinity();
    int stale_ = 0;
};

}  // namespace roadcast::te
