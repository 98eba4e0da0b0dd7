// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/train/optim.hpp"

#include <cmath>
#include <numbers>

#include "tagdet/errors.hpp"

namespace tagdet::train {

WarmupCosineSchedule::WarmupCosineSchedule(double base_lr, std::size_t warmup_steps, std::size_t total_steps)
    : base_lr_(base_lr), warmup_(warmup_steps), total_(total_steps) {
    if (!(base_lr >= 0.0)) throw ConfigError("schedule: learning rate must be >= 0");
    if (warmup_steps > total_steps) throw ConfigError("schedule: warmup longer than the run");
}

double WarmupCosineSchedule::at(std::size_t step) const {
    if (step < warmup_) return base_lr_ * static_cast<double>(step) / static_cast<double>(warmup_);
    if (step >= total_) return 0.0;
    const double progress = static_cast<double>(step - warmup_) / static_cast<double>(total_ - warmup_);
    return base_lr_ * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

Adam::Adam(model::ParameterList params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    for (ad::Parameter* p : params_) {
        m_.emplace_back(p->value.shape());
        v_.emplace_back(p->value.shape());
        if (p->grad.shape() != p->value.shape()) p->zero_grad();
    }
}

void Adam::zero_grad() {
    for (ad::Parameter* p : params_) p->zero_grad();
}

void Adam::step(double lr) {
    for (ad::Parameter* p : params_)
        if (!p->grad.all_finite()) throw NumericFault("adam: non-finite gradient in " + p->name);
    ++steps_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        ad::Parameter& p = *params_[i];
        ad::Tensor& m = m_[i];
        ad::Tensor& v = v_[i];
        for (std::size_t k = 0; k < p.value.numel(); ++k) {
            const double g = p.grad[k];
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
            v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
            const double update = (m[k] / bc1) / (std::sqrt(v[k] / bc2) + cfg_.eps);
            p.value[k] -= lr * (update + cfg_.weight_decay * p.value[k]);
        }
    }
}

}  // namespace tagdet::train
